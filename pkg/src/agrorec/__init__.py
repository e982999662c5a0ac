"""Crop recommendation pipeline: ingestion, EDA, lag features, from-scratch
Random Forest and SVM learners, and leakage-aware evaluation protocols."""

__version__ = "0.1.0"
