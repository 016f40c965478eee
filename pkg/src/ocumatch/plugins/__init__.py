"""Command-line matcher executables.

Each plugin follows the worker contract: invoked as
``entry_executable <image_a> <image_b>``, exits 0 and prints the
dissimilarity in [0, 1] as the final stdout line, or exits nonzero with a
reason on stderr. They import only numpy and the matching code so process
startup stays cheap.
"""
