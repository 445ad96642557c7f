"""Shared utilities: seeded randomness and plotting."""
