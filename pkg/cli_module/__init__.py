# cli_module/__init__.py

from .models import (
    AdaptorSettings,
    ConfigError,
    ExitCode,
    ManifestError,
    MixerSettings,
    PredictSettings,
    ToolConfig,
)
from .config import add_config_flags, build_config, parse_config_text
from .manifest import Manifest, ManifestRow, parse_manifest, read_manifest, scan_corpus_tree, write_manifest
from .commands import (
    cmd_eval,
    cmd_extract,
    cmd_manifest,
    cmd_mix,
    cmd_plot,
    cmd_predict,
    cmd_synth_corpus,
    cmd_train,
)

__all__ = [
    "AdaptorSettings",
    "ConfigError",
    "ExitCode",
    "ManifestError",
    "MixerSettings",
    "PredictSettings",
    "ToolConfig",
    "add_config_flags",
    "build_config",
    "parse_config_text",
    "Manifest",
    "ManifestRow",
    "parse_manifest",
    "read_manifest",
    "scan_corpus_tree",
    "write_manifest",
    "cmd_eval",
    "cmd_extract",
    "cmd_manifest",
    "cmd_mix",
    "cmd_plot",
    "cmd_predict",
    "cmd_synth_corpus",
    "cmd_train",
]
