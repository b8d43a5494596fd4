"""Local completeness logic on Kleene algebra with tests."""
