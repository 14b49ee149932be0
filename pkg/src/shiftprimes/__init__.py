"""Shifted-prime character sums and exact pair counts in progressions."""
