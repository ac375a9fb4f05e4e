"""Input tables, region selection, normalisation and the synthetic generator."""
