"""Experiment harness built on top of `qpaths`.

`core_experiments` holds the settings, YAML experiment configs, logging
bootstrap, runner, result files and command-line entrypoint used to
reproduce the partition-function and BDMC experiments with the reusable
`qpaths` library.

It is the reference layer of this repository, not part of the stable public
API of the published `qpaths` wheel.
"""
