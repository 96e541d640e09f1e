"""Symmetric-power L-functions of hyper-Kloosterman families over finite fields."""

from __future__ import annotations

__version__ = "0.1.0"
