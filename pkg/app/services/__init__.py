"""
Services package for BivQFT
Contains the transform, filtering, synthesis, denoising and decomposition logic
"""
