"""JSON-lines dataset manifests.

The first line is a header object (seed, generator version, class roles,
provenance); every following line is one (image, shape, class, view, split)
entry. Paths are stored relative to the manifest's directory.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Union,
)

import orjson
from mashumaro import field_options
from mashumaro.mixins.orjson import DataClassORJSONMixin

from fewshape.config import RecordConfig
from fewshape.core.const import GENERATOR_VERSION, Role, Split
from fewshape.exceptions import ClassLookupError, ConfigurationError

if TYPE_CHECKING:  # pragma: no cover
    from fewshape.training.episode import FewShotEpisode

__all__ = ["ManifestEntry", "ManifestHeader", "DatasetManifest"]

logger = logging.getLogger(__name__)


@dataclass
class ManifestEntry(DataClassORJSONMixin):
    image: str
    shape: str
    class_id: str = field(metadata=field_options(alias="class"))
    view: int
    split: Split

    class Config(RecordConfig):
        pass


@dataclass
class ManifestHeader(DataClassORJSONMixin):
    seed: int
    splits: Dict[str, Role]
    generator_version: str = GENERATOR_VERSION
    provenance: Dict[str, Any] = field(default_factory=dict)

    class Config(RecordConfig):
        pass


@dataclass
class DatasetManifest:
    header: ManifestHeader
    entries: List[ManifestEntry]
    root: Path = field(default_factory=Path)

    @property
    def seed(self) -> int:
        return self.header.seed

    @property
    def splits(self) -> Dict[str, Role]:
        return self.header.splits

    @property
    def provenance(self) -> Dict[str, Any]:
        return self.header.provenance

    @property
    def classes(self) -> List[str]:
        return list(self.header.splits)

    def classes_with_role(self, role: Role) -> List[str]:
        return [c for c, r in self.header.splits.items() if r == role]

    @property
    def base_classes(self) -> List[str]:
        return self.classes_with_role(Role.BASE)

    @property
    def novel_classes(self) -> List[str]:
        return self.classes_with_role(Role.NOVEL)

    def resolve(self, relative: str) -> Path:
        return self.root / relative

    def select(
        self,
        classes: Optional[Iterable[str]] = None,
        split: Optional[Split] = None,
    ) -> List[ManifestEntry]:
        wanted = None
        if classes is not None:
            wanted = set(classes)
            unknown = sorted(wanted - set(self.header.splits))
            if unknown:
                raise ClassLookupError(unknown, "Not in manifest")
        return [
            e
            for e in self.entries
            if (wanted is None or e.class_id in wanted)
            and (split is None or e.split == split)
        ]

    def shapes(
        self, class_id: str, split: Optional[Split] = None
    ) -> List[str]:
        """Distinct shape paths of a class, in manifest order."""
        seen: Dict[str, None] = {}
        for e in self.select([class_id], split):
            seen.setdefault(e.shape, None)
        return list(seen)

    def episode(
        self, class_id: str, shots: int, seed: int = 0
    ) -> "FewShotEpisode":
        from fewshape.training.episode import make_episode

        return make_episode(self, class_id, shots, seed)

    def subset(
        self,
        entries: Sequence[ManifestEntry],
        provenance: Optional[Dict[str, Any]] = None,
    ) -> "DatasetManifest":
        classes = {e.class_id for e in entries}
        header = replace(
            self.header,
            splits={
                c: r for c, r in self.header.splits.items() if c in classes
            },
            provenance=dict(
                self.header.provenance
                if provenance is None
                else provenance
            ),
        )
        return DatasetManifest(header, list(entries), self.root)

    def to_bytes(self) -> bytes:
        lines = [self.header.to_jsonb()]
        lines.extend(e.to_jsonb() for e in self.entries)
        return b"\n".join(lines) + b"\n"

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)
        logger.info("wrote manifest %s (%d entries)", path, len(self.entries))
        return path

    @classmethod
    def from_bytes(
        cls, data: bytes, root: Union[str, Path] = "."
    ) -> "DatasetManifest":
        lines = [line for line in data.splitlines() if line.strip()]
        if not lines:
            raise ConfigurationError("Manifest is empty")
        try:
            header = ManifestHeader.from_json(lines[0])
            entries = [ManifestEntry.from_json(line) for line in lines[1:]]
        except (orjson.JSONDecodeError, ValueError, KeyError) as e:
            raise ConfigurationError(f"Malformed manifest: {e}") from e
        manifest = cls(header, entries, Path(root))
        unknown = sorted({e.class_id for e in entries} - set(header.splits))
        if unknown:
            raise ClassLookupError(
                unknown, "Entries reference classes missing from the header"
            )
        return manifest

    @classmethod
    def load(
        cls, path: Union[str, Path], check_paths: bool = True
    ) -> "DatasetManifest":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Manifest {path} does not exist")
        manifest = cls.from_bytes(path.read_bytes(), path.parent)
        if check_paths:
            manifest.check_paths()
        return manifest

    def check_paths(self) -> None:
        referenced = {e.image for e in self.entries}
        referenced |= {e.shape for e in self.entries}
        missing = sorted(p for p in referenced if not self.resolve(p).exists())
        if missing:
            raise ConfigurationError(
                f"{len(missing)} manifest paths do not resolve, "
                f"first: {self.resolve(missing[0])}"
            )
