"""Desk-scale cryptanalysis workbench for three public-key quantum money schemes."""

__version__ = "0.1.0"
