"""katlcl tests."""
