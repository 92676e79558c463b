#!/usr/bin/env python
"""
Run the mdlt command-line interface.
"""

from mdlt.main import main

if __name__ == "__main__":
    main()
