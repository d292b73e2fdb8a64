"""Pydantic schemas for reports and JSON payloads."""
