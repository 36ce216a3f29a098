"""Smooth quantum relative entropies."""
