#!/usr/bin/env python3
"""Entry point for the prosody-mixer package."""

from prosody_main import main

if __name__ == "__main__":
    main()
