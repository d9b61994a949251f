"""Revision-aware method-level clone search over Q&A answer histories."""
