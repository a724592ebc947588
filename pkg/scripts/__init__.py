"""Scripts for polishforge."""
