"""Remote annealer client and a loopback reference server.

Wire contract (JSON over HTTP, POST <endpoint>/sample):

    request:  {"h": {"<qubit>": bias}, "J": [[a, b, value], ...],
               "num_reads": n, "seed": s}
    response: {"reads": [{"spins": {"<qubit>": -1|1}, "energy": e,
                          "occurrences": k}, ...], "backend": name}

The problem's constant offset is not transmitted; returned energies are
validated against the offset-free Hamiltonian to 1e-6 and the offset is
restored client-side. A response with mismatched energies or a total read
count different from the request is rejected outright.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import requests

from .exceptions import RejectedResponseError, TransportError
from .ising import IsingProblem, SampleSet, energies_for
from .samplers import SamplerConfig, sa_sample

ENERGY_TOLERANCE = 1e-6


def problem_to_wire(p: IsingProblem, cfg: SamplerConfig) -> dict:
    return {
        "h": {str(q): v for q, v in p.h.items()},
        "J": [[a, b, v] for (a, b), v in sorted(p.J.items())],
        "num_reads": cfg.num_reads,
        "seed": cfg.seed,
    }


def problem_from_wire(doc: dict) -> tuple[IsingProblem, SamplerConfig]:
    p = IsingProblem(
        h={int(q): float(v) for q, v in doc.get("h", {}).items()},
        J={(int(a), int(b)): float(v) for a, b, v in doc.get("J", [])},
    )
    cfg = SamplerConfig(num_reads=int(doc["num_reads"]), seed=int(doc["seed"]))
    return p, cfg


def remote_sample(endpoint: str, p: IsingProblem, cfg: SamplerConfig) -> SampleSet:
    """Sample via a remote annealer service, validating the response."""
    url = endpoint.rstrip("/") + "/sample"
    try:
        resp = requests.post(url, json=problem_to_wire(p, cfg), timeout=300)
        resp.raise_for_status()
        doc = resp.json()
    except requests.RequestException as exc:
        raise TransportError(f"remote sampler at {url} failed: {exc}") from exc

    try:
        reads = doc["reads"]
        backend = doc.get("backend", "remote")
        variables = p.variables
        spins = np.empty((len(reads), len(variables)), dtype=np.int8)
        energies = np.empty(len(reads), dtype=np.float64)
        occurrences = np.empty(len(reads), dtype=np.int64)
        for i, read in enumerate(reads):
            row = read["spins"]
            spins[i] = [row[str(q)] for q in variables]
            energies[i] = read["energy"]
            occurrences[i] = read["occurrences"]
    except (KeyError, TypeError, ValueError) as exc:
        raise RejectedResponseError(f"malformed response: {exc!r}") from exc

    if occurrences.sum() != cfg.num_reads:
        raise RejectedResponseError(
            f"response carries {occurrences.sum()} reads, requested {cfg.num_reads}"
        )
    bare = IsingProblem(h=p.h, J=p.J, offset=0.0)
    expected = energies_for(bare, variables, spins)
    err = np.abs(expected - energies)
    if err.size and err.max() > ENERGY_TOLERANCE:
        raise RejectedResponseError(
            f"response energies deviate by up to {err.max():.3g} (> {ENERGY_TOLERANCE})"
        )
    return SampleSet(
        variables,
        spins,
        expected + p.offset,
        occurrences,
        metadata={"backend": backend, "seed": cfg.seed, "endpoint": endpoint},
    )


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        if self.path != "/sample":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        doc = json.loads(self.rfile.read(length))
        p, cfg = problem_from_wire(doc)
        ss = self.server.sample_fn(p, cfg)  # type: ignore[attr-defined]
        reads = [
            {
                "spins": {str(q): int(s) for q, s in zip(ss.variables, ss.spins[i])},
                "energy": float(ss.energies[i]),
                "occurrences": int(ss.occurrences[i]),
            }
            for i in range(ss.num_rows)
        ]
        body = json.dumps(
            {"reads": reads, "backend": ss.metadata.get("backend", "sa")}
        ).encode("ascii")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # quiet
        pass


class LoopbackServer:
    """In-process HTTP server exposing a local sampler over the wire contract.

    Usage::

        with LoopbackServer() as url:
            ss = remote_sample(url, problem, cfg)
    """

    def __init__(self, sample_fn=sa_sample, host: str = "127.0.0.1", port: int = 0):
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.sample_fn = sample_fn  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> str:
        self._thread.start()
        return self.url

    def __exit__(self, *exc):
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=10)
        return False
