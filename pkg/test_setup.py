"""Tests for the installer helpers that run without touching ~/.batterycap."""

import os
from pathlib import Path

import yaml

import setup
from report import PipelineConfig


def test_self_test_passes_from_source_tree(capsys):
    assert setup.run_self_test(Path(setup.__file__).parent)
    assert "FAILED" not in capsys.readouterr().out


def test_default_answers_build_a_valid_config(monkeypatch):
    monkeypatch.setattr("builtins.input", lambda _: "")
    data = setup.build_config()
    assert data["source"]["noise_model"] == "white"
    assert data["estimator"]["name"] == "mle"
    assert PipelineConfig.from_dict(data).validate() == (True, None)


def test_prompt_number_retries_until_valid(monkeypatch):
    answers = iter(["many", "12"])
    monkeypatch.setattr("builtins.input", lambda _: next(answers))
    assert setup.prompt_number("Seed", 0, cast=int) == 12


def test_wrapper_script_runs_installed_cli():
    script = setup.wrapper_script(Path("/opt/batterycap/batterycap.py"))
    assert script.startswith("#!/bin/bash")
    assert '"/opt/batterycap/batterycap.py" "$@"' in script


def test_install_manifest_lists_existing_files():
    root = Path(setup.__file__).parent
    for name in setup.INSTALL_FILES:
        assert (root / name).exists(), name
    for name in setup.INSTALL_DIRS:
        assert (root / name).is_dir(), name


def test_install_files_copies_modules(tmp_path):
    install_dir = tmp_path / "install"
    copied = setup.install_files(install_dir)
    assert copied == setup.INSTALL_FILES + setup.INSTALL_DIRS
    assert (install_dir / "estimators" / "mle.py").exists()
    assert not (install_dir / "estimators" / "__pycache__").exists()
    assert setup.run_self_test(install_dir)


def test_install_files_skips_missing_sources(tmp_path, capsys):
    source = tmp_path / "source"
    source.mkdir()
    (source / "banner.py").write_text("")
    assert setup.install_files(tmp_path / "install", source_dir=source) == ["banner.py"]
    assert "Warning: qstate.py not found" in capsys.readouterr().out


def test_install_cli_writes_executable_wrapper(tmp_path):
    cli_path = setup.install_cli(tmp_path / "install", bin_dir=tmp_path / "bin")
    assert cli_path == tmp_path / "bin" / "bcap"
    assert os.access(cli_path, os.X_OK)
    assert str(tmp_path / "install" / "batterycap.py") in cli_path.read_text()


def test_cli_install_dir_prefers_local_bin(tmp_path):
    local_bin = tmp_path / ".local" / "bin"
    assert setup.get_cli_install_dir(home=tmp_path, path_env=str(local_bin)) == local_bin
    assert setup.get_cli_install_dir(home=tmp_path, path_env="") == local_bin


def test_uninstall_removes_wrapper_and_files(tmp_path):
    install_dir = tmp_path / "install"
    setup.install_files(install_dir)
    cli_path = setup.install_cli(install_dir, bin_dir=tmp_path / "bin")
    removed = setup.uninstall(install_dir, bin_dirs=[tmp_path / "bin", tmp_path / "other"], remove_files=True)
    assert removed == [cli_path, install_dir]
    assert not install_dir.exists()


def test_uninstall_can_keep_files(tmp_path, monkeypatch):
    install_dir = tmp_path / "install"
    install_dir.mkdir()
    monkeypatch.setattr("builtins.input", lambda _: "n")
    assert setup.uninstall(install_dir, bin_dirs=[tmp_path / "bin"]) == []
    assert install_dir.exists()


def test_create_config_keeps_existing_file(tmp_path, monkeypatch):
    config_path = tmp_path / "config.yaml"
    config_path.write_text("seed: 3\n")
    monkeypatch.setattr("builtins.input", lambda _: "n")
    assert setup.create_config(config_path)
    assert config_path.read_text() == "seed: 3\n"


def test_created_config_passes_installation_check(tmp_path, monkeypatch):
    install_dir = tmp_path / "install"
    setup.install_files(install_dir)
    monkeypatch.setattr("builtins.input", lambda _: "")
    assert setup.create_config(install_dir / "config.yaml")
    data = yaml.safe_load((install_dir / "config.yaml").read_text())
    assert data["estimator"]["name"] == "mle"
    assert setup.check_installation(install_dir)


def test_installation_check_flags_bad_config(tmp_path, capsys):
    install_dir = tmp_path / "install"
    setup.install_files(install_dir)
    (install_dir / "config.yaml").write_text("colour: blue\n")
    assert not setup.check_installation(install_dir)
    assert "config.yaml is INVALID" in capsys.readouterr().out


def test_main_runs_selected_steps(tmp_path, monkeypatch):
    monkeypatch.setattr(setup, "get_cli_install_dir", lambda: tmp_path / "bin")
    install_dir = tmp_path / "install"
    code = setup.main(["--only", "files", "--only", "cli", "--install-dir", str(install_dir)])
    assert code == 0
    assert (install_dir / "batterycap.py").exists()
    assert (tmp_path / "bin" / "bcap").exists()
    assert not (install_dir / "config.yaml").exists()
