"""Tests for the bundled worked examples."""

import json
from pathlib import Path

import pytest

from katlcl.src.bundles import bundle_names, bundle_notes, open_bundle, run_bundle
from katlcl.src.models import System
from tests.conftest import SMALL_MODEL


@pytest.fixture
def bundle_root(tmp_path: Path) -> Path:
    """A bundle root holding one small bundle with a wrong expectation."""
    directory = tmp_path / "mini"
    directory.mkdir()
    (directory / "model.kat").write_text(SMALL_MODEL)
    (directory / "step.deriv").write_text("(transfer inc {0})\n")
    manifest = {
        "name": "mini",
        "title": "Small counter",
        "system": "ul",
        "model": "model.kat",
        "domain": "trivial",
        "posts": [
            {"term": "inc", "pre": "{0}", "ok": "{1}"},
            {"term": "dec", "pre": "{0}", "ok": "{3}"},
        ],
        "triples": [{"triple": "[{0}] inc* [{3}]", "expect": "valid"}],
        "derivations": [
            {"file": "step.deriv", "expect": "accepted", "conclusion": "[{0}] inc [{1}]"},
            {"file": "missing.deriv"},
        ],
    }
    (directory / "bundle.json").write_text(json.dumps(manifest))
    return tmp_path


class TestShippedBundles:
    """Every shipped bundle passes."""

    def test_names(self):
        """The shipped bundles are found by their manifests."""
        assert bundle_names() == ["a3", "gs-parity", "interval-il", "sign-topkat"]

    @pytest.mark.parametrize("name", ["a3", "gs-parity", "interval-il", "sign-topkat"])
    def test_all_rows_pass(self, name):
        """Laws, posts, triples, specifications and derivations all hold."""
        rows = run_bundle(name, seed=7)
        assert rows
        failed = [f"{row.check}: {row.detail}" for row in rows if not row.passed]
        assert not failed

    def test_open_bundle(self):
        """The manifest picks the system and the domain file."""
        bundle, session = open_bundle("interval-il")
        assert bundle.system is System.LCIL
        assert session.system is System.LCIL
        assert session.domain.name == "interval"

    def test_rows_name_their_checks(self):
        """Rows cover the insertion laws, the derivations and the true alerts."""
        checks = [row.check for row in run_bundle("gs-parity")]
        assert checks[0] == "parity insertion"
        assert "verify transfer-b1.deriv" in checks
        assert "spec ok {++,--}" in checks


class TestRunBundle:
    """Tests for run_bundle on hand-made bundles."""

    def test_failures_become_rows(self, bundle_root):
        """A wrong expectation and a missing file fail their rows; the rest still run."""
        rows = {row.check: row for row in run_bundle("mini", root=bundle_root)}
        assert rows["post inc"].passed
        assert not rows["post dec"].passed
        assert rows["post dec"].detail == "ok: {}"
        assert rows["check [{0}] inc* [{3}]"].passed
        assert rows["verify step.deriv"].passed
        assert not rows["DerivationCase"].passed

    def test_unknown_bundle(self, tmp_path):
        """A bundle without a manifest is a single failed load row."""
        (row,) = run_bundle("nothing", root=tmp_path)
        assert row.check == "load"
        assert not row.passed

    def test_bad_manifest(self, bundle_root):
        """Manifests are validated."""
        (bundle_root / "mini" / "bundle.json").write_text(json.dumps({"name": "mini"}))
        (row,) = run_bundle("mini", root=bundle_root)
        assert row.check == "load"
        assert "system" in row.detail

    def test_bad_model(self, bundle_root):
        """Model errors stop the bundle at load time."""
        (bundle_root / "mini" / "model.kat").write_text("model relational\ncarrier 0 x\n")
        (row,) = run_bundle("mini", root=bundle_root)
        assert row.check == "load"
        assert "line 2" in row.detail


class TestBundleNotes:
    """Tests for the finitization notes."""

    @pytest.mark.parametrize(
        ("name", "phrase"),
        [
            ("a3", "No finitization"),
            ("gs-parity", "No finitization"),
            ("interval-il", "succ-sat"),
            ("sign-topkat", "clamped to {0,8}"),
        ],
    )
    def test_shipped_notes(self, name, phrase):
        """Every shipped bundle says how it was made finite."""
        assert any(phrase in note for note in bundle_notes(name))

    def test_missing_notes(self, bundle_root, tmp_path):
        """Manifests without notes, or without a manifest at all, have none."""
        assert bundle_notes("mini", root=bundle_root) == []
        assert bundle_notes("nothing", root=tmp_path) == []

    def test_unknown_manifest_keys_are_ignored(self, bundle_root):
        """Extra keys in a manifest do not stop it loading."""
        path = bundle_root / "mini" / "bundle.json"
        manifest = json.loads(path.read_text())
        manifest |= {"author": "someone", "notes": ["Carrier cut to 0..3"]}
        path.write_text(json.dumps(manifest))
        assert bundle_notes("mini", root=bundle_root) == ["Carrier cut to 0..3"]
        assert run_bundle("mini", root=bundle_root)[0].check != "load"
