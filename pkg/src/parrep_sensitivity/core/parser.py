"""
Network document parser.

This module reads and writes reaction networks as YAML documents, the same
representation produced by ``ReactionNetwork.to_dict``, and resolves model
references that name either a built-in network or a document on disk.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

import yaml

from ..exceptions import NetworkDefinitionError
from ..models.builtins import BUILTIN_MODELS, get_builtin
from ..models.network import (
    ConservedSum,
    ParameterVector,
    Reaction,
    ReactionNetwork,
    propensity_kind_from_dict,
)
from ..utils.file_handler import FileHandler

logger = logging.getLogger(__name__)


class NetworkParser:
    """
    Parser for network documents.

    A document holds ``name``, ``species``, ``volume``, ``parameters``
    (name/value pairs), ``reactions`` (stoichiometry plus a propensity kind
    and its fields) and optional ``conserved_sums``.
    """

    REQUIRED_KEYS = ("name", "species", "volume", "parameters", "reactions")
    OPTIONAL_KEYS = ("conserved_sums",)

    def parse_file(self, file_path: Path) -> ReactionNetwork:
        """
        Parse a network document from disk.

        Args:
            file_path: Path to the YAML document

        Returns:
            ReactionNetwork built from the document

        Raises:
            FileNotFoundError: If file doesn't exist
            NetworkDefinitionError: If the document is malformed
        """
        if not file_path.exists():
            raise FileNotFoundError(f"Network file not found: {file_path}")
        return self.parse_text(FileHandler.read_text(file_path), source=str(file_path))

    def parse_text(self, text: str, source: str = "<string>") -> ReactionNetwork:
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise NetworkDefinitionError(f"{source}: not a valid YAML document: {e}") from e
        if not isinstance(document, Mapping):
            raise NetworkDefinitionError(f"{source}: network document must be a mapping")
        return self.parse_document(document)

    def parse_document(self, document: Mapping[str, Any]) -> ReactionNetwork:
        """
        Build a network from an already loaded document.

        Raises:
            NetworkDefinitionError: On missing or unknown keys and invalid values
        """
        missing = [k for k in self.REQUIRED_KEYS if k not in document]
        if missing:
            raise NetworkDefinitionError(f"Network document is missing keys: {missing}")
        unknown = sorted(set(document) - set(self.REQUIRED_KEYS) - set(self.OPTIONAL_KEYS))
        if unknown:
            raise NetworkDefinitionError(f"Unknown keys in network document: {unknown}")

        try:
            params = ParameterVector(
                tuple(str(p["name"]) for p in document["parameters"]),
                tuple(float(p["value"]) for p in document["parameters"]),
            )
            reactions = tuple(self._parse_reaction(r) for r in document["reactions"])
            conserved = tuple(
                ConservedSum(tuple(int(i) for i in c["species"]), int(c["total"]))
                for c in document.get("conserved_sums") or []
            )
            return ReactionNetwork(
                name=str(document["name"]),
                species_names=tuple(str(s) for s in document["species"]),
                reactions=reactions,
                volume=float(document["volume"]),
                params=params,
                conserved_sums=conserved,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise NetworkDefinitionError(f"Malformed network document: {e!r}") from e

    def _parse_reaction(self, data: Mapping[str, Any]) -> Reaction:
        fields = dict(data)
        stoich = tuple(int(v) for v in fields.pop("stoich"))
        name = str(fields.pop("name", ""))
        return Reaction(stoich, propensity_kind_from_dict(fields), name)

    @staticmethod
    def dump(net: ReactionNetwork) -> str:
        """Serialize a network as a YAML document."""
        return yaml.safe_dump(net.to_dict(), sort_keys=False, default_flow_style=None)


def load_network(reference: Union[str, Path]) -> ReactionNetwork:
    """
    Resolve a model reference.

    Args:
        reference: Built-in model name or path to a network document

    Returns:
        ReactionNetwork
    """
    if isinstance(reference, str) and reference in BUILTIN_MODELS:
        return get_builtin(reference)
    path = Path(reference)
    logger.debug("Loading network document %s", path)
    return NetworkParser().parse_file(path)


def builtin_names() -> List[str]:
    return sorted(BUILTIN_MODELS)


def network_summary(net: ReactionNetwork) -> Dict[str, Any]:
    return {
        "name": net.name,
        "species": list(net.species_names),
        "reactions": [r.name for r in net.reactions],
        "parameters": dict(zip(net.params.names, net.params.values)),
        "volume": net.volume,
    }
