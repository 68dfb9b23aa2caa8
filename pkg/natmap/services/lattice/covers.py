"""Index-2 subgroups by Reidemeister-Schreier rewriting."""

from __future__ import annotations

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from natmap.schemas.lattice import FundamentalDomain, GroupPresentation, Word
from natmap.services.errors import DimensionError, RelatorError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import (
    check_relators,
    evaluate_word,
    inverse_word,
    reduce_word,
)
from natmap.services.lattice.octagon import octagon_domain

logger = logging.getLogger(__name__)


def word_parity(word: Sequence[int], parity: Sequence[int]) -> int:
    return sum(parity[abs(letter) - 1] for letter in word) % 2


def index2_cover(group: GroupPresentation, parity: Sequence[int]) -> GroupPresentation:
    """Presentation of the kernel of a parity map Gamma -> Z/2.

    Schreier generators r g rep(r g)^-1 for the transversal {1, t} are freely
    reduced, trivial ones dropped; each relator is rewritten from both cosets.
    The result records the generators as words in the parent group and the
    transversal.

    Args:
        group: Parent presentation.
        parity: Value 0 or 1 per generator.

    Raises:
        RelatorError: If a relator has odd parity, so parity is not a homomorphism.
    """
    parity = [int(p) % 2 for p in parity]
    if len(parity) != group.rank:
        raise DimensionError(f"Parity needs {group.rank} entries, got {len(parity)}")
    for relator in group.relators:
        if word_parity(relator, parity):
            raise RelatorError(f"Relator {relator} has odd parity; the map is not a homomorphism")
    if not any(parity):
        return group

    t_index = parity.index(1) + 1
    reps: List[Word] = [(), (t_index,)]
    symbols: Dict[Tuple[int, int], int] = {}
    words: List[Word] = []
    for coset, rep in enumerate(reps):
        for index in range(1, group.rank + 1):
            target = (coset + parity[index - 1]) % 2
            word = reduce_word(rep + (index,) + inverse_word(reps[target]))
            if word:
                words.append(word)
                symbols[(coset, index)] = len(words)

    def rewrite(coset: int, relator: Sequence[int]) -> Word:
        start = coset
        out: List[int] = []
        for letter in relator:
            index = abs(letter)
            if letter > 0:
                symbol = symbols.get((coset, index))
                if symbol:
                    out.append(symbol)
                coset = (coset + parity[index - 1]) % 2
            else:
                coset = (coset + parity[index - 1]) % 2
                symbol = symbols.get((coset, index))
                if symbol:
                    out.append(-symbol)
        if coset != start:
            raise RelatorError(f"Relator {tuple(relator)} does not close up in the cover")
        return reduce_word(out)

    relators = [rewrite(coset, relator) for relator in group.relators for coset in (0, 1)]
    generators = np.stack([evaluate_word(group, w) for w in words])
    translate = evaluate_word(group, reps[1])
    radius = None
    if group.covering_radius is not None:
        radius = group.covering_radius + float(hyp.distance(group.base, translate @ group.base))
    cover = GroupPresentation(
        dim=group.dim,
        generators=generators,
        relators=[r for r in relators if r],
        label=f"{group.label}-cover-{t_index}",
        covering_radius=radius,
        parent_words=words,
        transversal=reps,
    )
    logger.info(f"Index-2 cover of {group.label}: {cover.rank} Schreier generators")
    return check_relators(cover)


def cover_domain(
    domain: FundamentalDomain, parent: GroupPresentation, cover: GroupPresentation
) -> FundamentalDomain:
    """Union of the translates of the parent domain by the cover's transversal."""
    if cover.transversal is None:
        return domain
    translates = np.stack([evaluate_word(parent, rep) for rep in cover.transversal])
    translates = np.einsum("tij,djk->tdik", translates, domain.translates).reshape(-1, 3, 3)
    return octagon_domain(domain.phi_nodes, domain.rho_nodes, translates, cover.label)
