#!/usr/bin/env python3
"""Regenerate the frozen ticket fixture. Deterministic; safe to re-run."""

from pathlib import Path

from ticketforge.datagen import write_ticket_fixture

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    manifest = write_ticket_fixture(ROOT / "fixtures" / "tickets_1000.jsonl")
    print(manifest)
