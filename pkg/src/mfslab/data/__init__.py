"""Shipped surface descriptors and invariant tables."""
