#!/usr/bin/env python3
"""
Convenience script to run pdhg_primal.main
"""
from pdhg_primal.main import start

if __name__ == "__main__":
    start()
