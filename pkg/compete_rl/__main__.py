#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""python -m compete_rl"""

from compete_rl.cli import main

if __name__ == "__main__":
    main()
