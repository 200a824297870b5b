"""Registered evolution systems and the checks tying their formulations together."""

from skdv_core.models.registry import MODEL_NAMES, EvolutionEquation, ModelDef, get_model

__all__ = ["MODEL_NAMES", "EvolutionEquation", "ModelDef", "get_model"]
