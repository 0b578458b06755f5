"""Run configuration: one JSON file drives every pipeline stage.

Caps default to full-scale values (100 developers, 1,500 methods per
repository, 500-instance test sets, 1,000-instance training minimum);
fixture-scale runs override them in the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .storage import dumps_canonical, read_json, sha256_text


@dataclass(frozen=True, slots=True)
class RepoSpec:
    path: str
    branch: str = "main"
    repo_id: str = ""

    def resolved_id(self) -> str:
        return self.repo_id or Path(self.path).name


@dataclass(frozen=True, slots=True)
class Caps:
    top_developers: int = 100
    contributor_pool: int = 1000
    methods_per_repo: int = 1500
    test_size: int = 500
    min_train: int = 1000

    def validate(self) -> None:
        for name in ("top_developers", "contributor_pool", "methods_per_repo", "test_size", "min_train"):
            if getattr(self, name) < 1:
                raise ConfigError(f"cap {name} must be positive")


@dataclass(frozen=True, slots=True)
class CrystalBleuKnobs:
    k: int = 500
    max_order: int = 4


@dataclass(frozen=True, slots=True)
class RunConfig:
    organization: str
    repos: tuple[RepoSpec, ...]
    seed: int
    out_dir: str
    generic_repos: tuple[RepoSpec, ...] = ()
    caps: Caps = field(default_factory=Caps)
    crystal_bleu: CrystalBleuKnobs = field(default_factory=CrystalBleuKnobs)
    identity_overrides: str | None = None
    scenario_file: str | None = None

    def to_dict(self) -> dict:
        return {
            "organization": self.organization,
            "repos": [
                {"path": r.path, "branch": r.branch, "repo_id": r.resolved_id()}
                for r in self.repos
            ],
            "generic_repos": [
                {"path": r.path, "branch": r.branch, "repo_id": r.resolved_id()}
                for r in self.generic_repos
            ],
            "seed": self.seed,
            "out_dir": self.out_dir,
            "caps": {
                "top_developers": self.caps.top_developers,
                "contributor_pool": self.caps.contributor_pool,
                "methods_per_repo": self.caps.methods_per_repo,
                "test_size": self.caps.test_size,
                "min_train": self.caps.min_train,
            },
            "crystal_bleu": {"k": self.crystal_bleu.k, "max_order": self.crystal_bleu.max_order},
            "identity_overrides": self.identity_overrides,
            "scenario_file": self.scenario_file,
        }

    def config_hash(self) -> str:
        # the output directory does not affect content, only placement
        payload = self.to_dict()
        payload.pop("out_dir")
        return sha256_text(dumps_canonical(payload))[:16]


def _parse_repos(raw: object, what: str) -> tuple[RepoSpec, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(f"{what} must be a list")
    specs = []
    for item in raw:
        if not isinstance(item, dict) or "path" not in item:
            raise ConfigError(f"each {what} entry needs a 'path'")
        specs.append(RepoSpec(
            path=item["path"],
            branch=item.get("branch", "main"),
            repo_id=item.get("repo_id", ""),
        ))
    return tuple(specs)


def load_config(path: str | Path, out_dir: str | None = None, seed: int | None = None) -> RunConfig:
    """Load and validate a run configuration; CLI flags may override."""
    try:
        data = read_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("organization", "repos", "seed", "out_dir"):
        if key not in data and not (key == "out_dir" and out_dir) and not (key == "seed" and seed is not None):
            raise ConfigError(f"config missing required key {key!r}")

    caps_raw = data.get("caps", {})
    caps = Caps(
        top_developers=caps_raw.get("top_developers", 100),
        contributor_pool=caps_raw.get("contributor_pool", 1000),
        methods_per_repo=caps_raw.get("methods_per_repo", 1500),
        test_size=caps_raw.get("test_size", 500),
        min_train=caps_raw.get("min_train", 1000),
    )
    caps.validate()
    cb_raw = data.get("crystal_bleu", {})
    config = RunConfig(
        organization=data["organization"],
        repos=_parse_repos(data["repos"], "repos"),
        generic_repos=_parse_repos(data.get("generic_repos"), "generic_repos"),
        seed=seed if seed is not None else int(data["seed"]),
        out_dir=out_dir or data["out_dir"],
        caps=caps,
        crystal_bleu=CrystalBleuKnobs(
            k=cb_raw.get("k", 500), max_order=cb_raw.get("max_order", 4)
        ),
        identity_overrides=data.get("identity_overrides"),
        scenario_file=data.get("scenario_file"),
    )
    if not config.repos:
        raise ConfigError("config lists no repositories")
    ids = [r.resolved_id() for r in config.repos + config.generic_repos]
    if len(set(ids)) != len(ids):
        raise ConfigError("repo ids must be unique across repos and generic_repos")
    return config
