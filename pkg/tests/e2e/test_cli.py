import json
import os
import shutil

import pytest
from click.testing import CliRunner

from app.pipeline.cli import cli, main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def firewall_args(corpus_dir):
    base = os.path.join(corpus_dir, 'firewall')
    return ['--schema', os.path.join(base, 'firewall.schema'),
            '--program', os.path.join(base, 'delete-device.smpsl'),
            '--spec', os.path.join(base, 'delete-device-incorrect.spec')]


# --- verify ---

def test_verify_invalid_prints_counterexample(runner, firewall_args):
    result = runner.invoke(cli, ['--env', 'testing', 'verify'] + firewall_args)
    assert result.exit_code == 1
    assert "delete-device: INVALID" in result.stdout
    assert 'counterexample (initial state):' in result.stdout
    assert 'Device' in result.stdout


def test_verify_json_output(runner, firewall_args):
    result = runner.invoke(cli, ['--env', 'testing', 'verify', '--json', '--solver', 'pycosat'] + firewall_args)
    assert result.exit_code == 1
    data = json.loads(result.stdout)
    assert data['status'] == 'invalid'
    assert data['replayed'] is True
    assert data['bound']['bnd'] >= 1


def test_verify_emits_intermediate_artifacts(runner, firewall_args, tmp_path):
    cnf_path, smt_path = tmp_path / 'last.cnf', tmp_path / 'vc.smt2'
    result = runner.invoke(cli, ['--env', 'testing', 'verify', '--emit-wp', '--emit-vc', '--emit-ssnf',
                                 '--emit-bound', '--emit-cnf', str(cnf_path), '--emit-smtlib', str(smt_path)]
                           + firewall_args)
    assert result.exit_code == 1
    assert 'alpha: ' in result.stdout
    assert '"bnd"' in result.stdout
    assert cnf_path.read_text().startswith('c universe ')
    assert '(check-sat)' in smt_path.read_text()


def test_verify_inflated_program(runner, firewall_args):
    result = runner.invoke(cli, ['--env', 'testing', 'verify', '--copies', '2', '--json'] + firewall_args)
    assert result.exit_code == 1
    assert json.loads(result.stdout)['program'] == 'delete-device2'


def test_verify_reports_parse_errors(runner, firewall_args, tmp_path):
    broken = tmp_path / 'broken.spec'
    broken.write_text("pre exists x. Device(x) &;\n")
    args = list(firewall_args)
    args[-1] = str(broken)
    result = runner.invoke(cli, ['--env', 'testing', 'verify'] + args)
    assert result.exit_code == 3
    assert "error: " in result.output


def test_verify_rejects_malformed_domain_option(firewall_args):
    assert main(['--env', 'testing', 'verify', '--domain', 'codes'] + firewall_args) == 3


# --- verify-corpus ---

def test_verify_corpus_table(runner, corpus_dir, tmp_path):
    source = os.path.join(corpus_dir, 'firewall')
    for name in ('firewall.schema', 'delete-device.smpsl', 'delete-device-incorrect.spec'):
        shutil.copy(os.path.join(source, name), tmp_path / name)
    (tmp_path / 'cases.txt').write_text(
        "# name  program  spec  verdict\n"
        "incorrect  delete-device.smpsl  delete-device-incorrect.spec  invalid\n"
    )
    result = runner.invoke(cli, ['--env', 'testing', 'verify-corpus', str(tmp_path)])
    assert result.exit_code == 0
    header = result.stdout.splitlines()[0].split()
    assert header == ['case', 'expected', 'verdict', 'match', 'seconds']
    assert 'incorrect' in result.stdout

    result = runner.invoke(cli, ['--env', 'testing', 'verify-corpus', '--json', str(tmp_path)])
    assert json.loads(result.stdout)[0]['match'] is True


def test_verify_corpus_mismatch_exits_one(runner, corpus_dir, tmp_path):
    source = os.path.join(corpus_dir, 'firewall')
    for name in ('firewall.schema', 'delete-device.smpsl', 'delete-device-incorrect.spec'):
        shutil.copy(os.path.join(source, name), tmp_path / name)
    (tmp_path / 'cases.txt').write_text("wrong  delete-device.smpsl  delete-device-incorrect.spec  valid\n")
    result = runner.invoke(cli, ['--env', 'testing', 'verify-corpus', str(tmp_path)])
    assert result.exit_code == 1
    assert 'NO' in result.stdout


# --- Usage errors ---

def test_main_maps_usage_errors_to_three(corpus_dir):
    assert main(['--env', 'testing', 'verify']) == 3
    assert main(['--env', 'testing', 'verify', '--schema', os.path.join(corpus_dir, 'missing.schema'),
                 '--program', 'x', '--spec', 'y']) == 3
    assert main(['--env', 'testing', 'no-such-command']) == 3
