"""Grassmann-valued fields on a periodic grid."""
