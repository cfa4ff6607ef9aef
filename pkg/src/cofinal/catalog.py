"""Named groups with the witnesses the filtration constructions consume.

Largeness and virtual fibering are taken as given: a catalog entry carries
an explicit epimorphism onto a free group and/or an explicit mapping-torus
decomposition, and both are validated on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import UnknownGroupError, WitnessError
from .folding import generates_free_group
from .presentations import (
    FinitePresentation,
    GroupAutomorphism,
    Word,
    _substitute,
    identity_automorphism,
    make_automorphism,
    mk_free_group,
    mk_semidirect_Z,
    mk_surface_group,
)


@dataclass(frozen=True)
class FreeQuotientWitness:
    """Epimorphism ``source -> F_rank`` given by generator images."""

    source: FinitePresentation
    rank: int
    images: tuple[Word, ...]

    def __call__(self, w: Word) -> Word:
        return _substitute(self.images, w)

    def validate(self) -> "FreeQuotientWitness":
        if self.rank < 2:
            raise WitnessError("free quotient must be non-cyclic (rank >= 2)")
        if len(self.images) != self.source.num_generators:
            raise WitnessError("one image per source generator required")
        for w in self.images:
            if w.max_generator() >= self.rank:
                raise WitnessError(f"image {w} leaves F_{self.rank}")
        for rel in self.source.relators:
            if self(rel):
                raise WitnessError(f"relator {self.source.format_word(rel)} does not die in F_{self.rank}")
        if not generates_free_group(self.images, self.rank):
            raise WitnessError("images do not generate the free group")
        return self


def free_quotient(source: FinitePresentation, rank: int, images: Sequence[Word | str]) -> FreeQuotientWitness:
    target = mk_free_group(rank)
    imgs = tuple(target.word(w) if isinstance(w, str) else w for w in images)
    return FreeQuotientWitness(source, rank, imgs).validate()


def identity_witness(F: FinitePresentation) -> FreeQuotientWitness:
    if not F.is_free:
        raise WitnessError("identity witness needs a free presentation")
    return free_quotient(F, F.num_generators, [F.generator(j) for j in range(F.num_generators)])


@dataclass(frozen=True)
class FiberingWitness:
    fiber: FinitePresentation
    monodromy: GroupAutomorphism


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    presentation: FinitePresentation
    free_witness: FreeQuotientWitness | None = None
    fibering: FiberingWitness | None = None
    expected_b1: int | None = None
    expected_torsion: int | None = None
    description: str = ""


def _fibered(name: str, fiber: FinitePresentation, images, inverse_images, b1, torsion, description):
    phi = make_automorphism(fiber, images, inverse_images)
    return CatalogEntry(name, mk_semidirect_Z(fiber, phi), None, FiberingWitness(fiber, phi),
                        b1, torsion, description)


def fig8_monodromy() -> GroupAutomorphism:
    return make_automorphism(mk_free_group(2), ["ab", "a"], ["b", "Ba"])


def trefoil_monodromy() -> GroupAutomorphism:
    return make_automorphism(mk_free_group(2), ["b", "Ab"], ["aB", "a"])


def surface_twist() -> GroupAutomorphism:
    """Twist of the genus-2 surface group fixing the relator word exactly."""
    return make_automorphism(mk_surface_group(2), ["ab", "b", "c", "d"], ["aB", "b", "c", "d"])


def _build() -> dict[str, CatalogEntry]:
    F2, F3, S2 = mk_free_group(2), mk_free_group(3), mk_surface_group(2)
    entries = [
        CatalogEntry("free2", F2, identity_witness(F2), FiberingWitness(F2, identity_automorphism(F2)),
                     2, 1, "free group of rank 2"),
        CatalogEntry("free3", F3, identity_witness(F3), FiberingWitness(F3, identity_automorphism(F3)),
                     3, 1, "free group of rank 3"),
        CatalogEntry("surface_g2", S2, free_quotient(S2, 2, ["a", "", "b", ""]),
                     FiberingWitness(S2, identity_automorphism(S2)), 4, 1,
                     "closed genus-2 surface group; a,c -> free basis, b,d -> 1"),
        _fibered("fig8", F2, ["ab", "a"], ["b", "Ba"], 1, 1,
                 "mapping torus of a->ab, b->a on F2"),
        _fibered("trefoil", F2, ["b", "Ab"], ["aB", "a"], 1, 1,
                 "mapping torus of a->b, b->a^-1 b on F2"),
        _fibered("surface_g2_twist", S2, ["ab", "b", "c", "d"], ["aB", "b", "c", "d"], 4, 1,
                 "mapping torus of a twist of the genus-2 surface"),
    ]
    return {e.name: e for e in entries}


_CATALOG: dict[str, CatalogEntry] | None = None


def catalog() -> dict[str, CatalogEntry]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build()
    return _CATALOG


def lookup(name: str) -> CatalogEntry:
    try:
        return catalog()[name]
    except KeyError:
        raise UnknownGroupError(f"unknown catalog group {name!r}; known: {', '.join(sorted(catalog()))}") from None
