"""Expression language for densities and superspace expressions."""

from skdv_core.dsl.parser import parse, parse_component, parse_super, tokenize
from skdv_core.dsl.render import render, render_components

__all__ = ["parse", "parse_component", "parse_super", "tokenize", "render", "render_components"]
