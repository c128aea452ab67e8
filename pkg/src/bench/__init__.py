"""
Benchmark harness: graph generators, run reports and the command line
"""
