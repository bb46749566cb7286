"""Run configuration: bundled defaults, optional config file, flag overrides.

The config file is JSON with optional sections: "taxonomy", "synonyms", "kb"
(file paths), "providers" (endpoint/model/key settings), "planner"
(rows/cols/gap_m), "retrieval"/"knowledge" (k). Command-line flags win over
the file, the file wins over bundled defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError
from .frontend import NormalizationTable
from .knowledge import KnowledgeBase
from .providers import ProviderConfig
from .taxonomy import TaxonomyConfig, default_config


@dataclass
class RunConfig:
    taxonomy_path: Optional[Path] = None
    synonyms_path: Optional[Path] = None
    kb_path: Optional[Path] = None
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    provider_kind: str = "mock"  # mock | http
    rows: int = 10
    cols: int = 10
    gap_m: float = 10.0
    k_paths: int = 5
    k_kb: int = 3
    audit_retrieval: bool = False  # provider pass that may veto path candidates

    @classmethod
    def load(cls, path: Optional[str | Path]) -> "RunConfig":
        cfg = cls()
        if path is None:
            return cfg
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
        base = Path(path).parent
        for key, attr in (("taxonomy", "taxonomy_path"), ("synonyms", "synonyms_path"), ("kb", "kb_path")):
            if key in data:
                setattr(cfg, attr, (base / data[key]).resolve())
        providers = data.get("providers", {})
        cfg.provider = ProviderConfig(
            endpoint=providers.get("endpoint", cfg.provider.endpoint),
            chat_model=providers.get("chat_model", cfg.provider.chat_model),
            embed_model=providers.get("embed_model", cfg.provider.embed_model),
            api_key_env=providers.get("api_key_env", cfg.provider.api_key_env),
            timeout_s=providers.get("timeout_s", cfg.provider.timeout_s),
            max_retries=providers.get("max_retries", cfg.provider.max_retries),
        )
        cfg.provider_kind = providers.get("kind", cfg.provider_kind)
        planner = data.get("planner", {})
        cfg.rows = int(planner.get("rows", cfg.rows))
        cfg.cols = int(planner.get("cols", cfg.cols))
        cfg.gap_m = float(planner.get("gap_m", cfg.gap_m))
        retrieval = data.get("retrieval", {})
        cfg.k_paths = int(retrieval.get("k", cfg.k_paths))
        cfg.audit_retrieval = bool(retrieval.get("audit", cfg.audit_retrieval))
        cfg.k_kb = int(data.get("knowledge", {}).get("k", cfg.k_kb))
        return cfg

    # -- resolved artifacts ---------------------------------------------------

    def taxonomy(self) -> TaxonomyConfig:
        if self.taxonomy_path is not None:
            return TaxonomyConfig.from_file(self.taxonomy_path)
        return default_config()

    def tables(self, taxonomy: TaxonomyConfig) -> NormalizationTable:
        if self.synonyms_path is not None:
            return NormalizationTable.from_file(self.synonyms_path, taxonomy)
        return NormalizationTable.bundled(taxonomy)

    def knowledge_base(self) -> KnowledgeBase:
        if self.kb_path is not None:
            return KnowledgeBase.from_file(self.kb_path)
        return KnowledgeBase.bundled()

    def data_hashes(self) -> dict[str, str]:
        """Content hashes of the resolved data files, for the run manifest."""

        def digest(data: bytes) -> str:
            return hashlib.sha256(data).hexdigest()

        out = {}
        bundled = resources.files("sceneforge.data")
        for name, override, bundled_name in (
            ("taxonomy", self.taxonomy_path, "taxonomy.json"),
            ("synonyms", self.synonyms_path, "synonyms.json"),
            ("kb", self.kb_path, "knowledge_base.json"),
        ):
            raw = Path(override).read_bytes() if override else bundled.joinpath(bundled_name).read_bytes()
            out[name] = digest(raw)
        return out
