"""Module entry point: ``python -m szegolab`` behaves like the ``szegolab``
console script."""

from .cli import console_main

console_main()
