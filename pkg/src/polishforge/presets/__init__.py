"""Gated constructions: streams whose dense points wait for witness rows."""
