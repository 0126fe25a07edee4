"""Frequent itemsets, association rules, concept lattices and support dynamics for short-text corpora."""

__version__ = "0.1.0"
