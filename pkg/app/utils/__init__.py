"""
File I/O, logging setup and cross-check oracles
"""
