"""Mocks used during local development."""
