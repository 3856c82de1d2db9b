"""Exact log de Rham-Witt complexes over monoid algebras."""
