"""Test suites: unit (per package), integration (corpus cases), e2e (command line)."""
