"""Exact arithmetic and geometry of the circle arrangements S_D over imaginary quadratic fields."""

from .errors import SchmidtError, ValidationError
from .qfield import FieldCtx, IdealHNF, KElem, OElem, hilbert_symbol, make_field
from .classgrp import ClassGroup, QForm, class_group
from .geom import CircleVec, circle_make, classify, pairing
from .arrangement import Arrangement, ArrangementSpec, Window, enumerate_window

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "ArrangementSpec",
    "CircleVec",
    "ClassGroup",
    "FieldCtx",
    "IdealHNF",
    "KElem",
    "OElem",
    "QForm",
    "SchmidtError",
    "ValidationError",
    "Window",
    "circle_make",
    "class_group",
    "classify",
    "enumerate_window",
    "hilbert_symbol",
    "make_field",
    "pairing",
]
