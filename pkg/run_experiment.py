#!/usr/bin/env python3
"""
Experiment Runner

Entry point for the toeplitz-spectra command line. Run

    python3 run_experiment.py <subcommand> --help

for the options of a subcommand.
"""

from toeplitz.cli import main

if __name__ == "__main__":
    main()
