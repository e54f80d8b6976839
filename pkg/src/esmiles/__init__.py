"""Extended-SMILES toolkit.

Layers (bottom up): molecular graphs (:mod:`esmiles.molgraph`), the
extension-annotation document layer (:mod:`esmiles.extension`), tokenizer
(:mod:`esmiles.tokenizer`), fingerprints (:mod:`esmiles.fingerprint`),
perceptual hashing (:mod:`esmiles.phash`), dataset engine
(:mod:`esmiles.engine`, :mod:`esmiles.tasks`), corpus generators
(:mod:`esmiles.generate`), benchmark scoring (:mod:`esmiles.evaluate`),
annotation HTTP service (:mod:`esmiles.service`) and the ``esmiles`` CLI
(:mod:`esmiles.cli`).
"""

__version__ = "0.1.0"

from esmiles.molgraph import (  # noqa: F401
    Atom,
    Bond,
    MolGraph,
    canonical_smiles,
    parse_smiles,
    validate_valence,
    write_smiles,
)
