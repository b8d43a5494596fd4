"""katlcl library modules."""
