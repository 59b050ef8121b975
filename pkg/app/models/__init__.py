"""
Domain models: quaternions, signals, densities, filter parameters, problems and reports
"""
