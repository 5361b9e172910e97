"""Seeded generator of NVD-1.1-format feeds with label-correlated text.

Offline stand-in for a real feed download: descriptions carry vocabulary
correlated with their severity and type labels so the desk-scale training
run has signal to learn. Set VULNTRIAGE_NVD_FEED to a real feed file to
bypass generation wherever callers honor it.
"""
from __future__ import annotations

import gzip
import json
import random
from pathlib import Path

from .taxonomy import SEVERITY_NAMES, default_taxonomy

FEED_ENV_VAR = "VULNTRIAGE_NVD_FEED"

_PRODUCTS = (
    "Acme Router firmware", "OpenWidget CMS", "Cobalt HTTP Server", "Nimbus Mail Gateway",
    "Quartz Database Engine", "Falcon VPN Client", "Orchid Media Player", "Granite File Manager",
    "Harbor Container Runtime", "Lantern IoT Hub", "Prism Web Framework", "Cedar Log Collector",
    "Vertex CI Agent", "Aurora Chat Server", "Basalt Firewall Appliance", "Comet Package Manager",
    "Drift Monitoring Daemon", "Ember PDF Library", "Flux Message Broker", "Glacier Backup Tool",
)

_COMPONENTS = (
    "the login form", "the admin console", "the REST endpoint", "the file upload handler",
    "the session manager", "the template renderer", "the configuration parser",
    "the search module", "the update service", "the report generator",
)

# One phrase pool per taxonomy category, index-aligned with the default order.
_TYPE_PHRASES = (
    (
        "a heap-based buffer overflow in the packet parser",
        "a stack-based buffer overflow when handling long header values",
        "an out-of-bounds write triggered by a crafted archive",
        "an out-of-bounds read in the image decoder memcpy path",
    ),
    (
        "remote code execution via unsafe deserialization of request payloads",
        "OS command injection through unsanitized shell arguments",
        "arbitrary code execution by uploading a crafted plugin",
        "code injection in the expression evaluator",
    ),
    (
        "uncontrolled resource consumption leading to denial of service",
        "an infinite loop reachable with a malformed packet causing denial of service",
        "memory exhaustion via unbounded allocation of parser buffers",
        "a crash loop that denies service to legitimate clients",
    ),
    (
        "stored cross-site scripting in the comment field",
        "reflected cross-site scripting via the search query parameter",
        "cross-site scripting because HTML output is not escaped",
        "DOM-based cross-site scripting in the preview widget",
    ),
    (
        "SQL injection in the id parameter of the listing endpoint",
        "SQL injection via improper neutralization of quoted identifiers",
        "blind SQL injection in the sort column argument",
        "SQL injection allowing extraction of database tables",
    ),
    (
        "cross-site request forgery in the settings form",
        "cross-site request forgery allowing state-changing requests without tokens",
        "a missing anti-CSRF token on the password change action",
        "cross-site request forgery on the account deletion endpoint",
    ),
    (
        "improper privilege management allowing local users to gain root privileges",
        "privilege escalation via a setuid helper binary",
        "incorrect permission checks letting standard users obtain administrator rights",
        "privilege escalation through an unprotected service configuration",
    ),
    (
        "exposure of sensitive information in debug log files",
        "information disclosure of credentials via verbose error messages",
        "sensitive data exposure because backup files are world readable",
        "information disclosure of session tokens in the referrer header",
    ),
    (
        "directory traversal via ../ sequences in the path parameter",
        "path traversal allowing read access to files outside the web root",
        "directory traversal in the archive extraction routine",
        "path traversal through encoded separator characters",
    ),
    (
        "clickjacking because the X-Frame-Options header is missing",
        "UI redressing via untrusted framing of the dashboard",
        "clickjacking on the payment confirmation page",
        "a frameable response enabling clickjacking attacks",
    ),
)

# Impact wording per severity index; gives the severity head its signal.
_IMPACT_PHRASES = (
    (
        "Exploitation requires local access and extensive user interaction, with minor impact.",
        "The issue has low impact and is only reachable in unusual configurations.",
        "Successful attacks disclose only non-sensitive diagnostic details.",
    ),
    (
        "An attacker may obtain limited information under specific configurations.",
        "Exploitation requires user interaction and yields moderate impact.",
        "The flaw allows partial degradation of the affected component.",
    ),
    (
        "A remote attacker can cause significant impact to confidentiality and availability.",
        "Exploitation is possible without authentication and affects core functionality.",
        "Attackers on the network can reliably trigger the flaw with high impact.",
    ),
    (
        "An unauthenticated remote attacker can execute arbitrary code with root privileges.",
        "Exploitation leads to complete system compromise without user interaction.",
        "The flaw allows full takeover of the affected installation.",
    ),
)

# Severity mixes per category: aggressive memory/injection flaws skew high.
_SEVERITY_WEIGHTS = (
    (5, 15, 45, 35),   # Buffer Overflow
    (2, 8, 35, 55),    # RCE
    (10, 35, 45, 10),  # DoS
    (20, 55, 22, 3),   # XSS
    (4, 16, 40, 40),   # SQL Injection
    (25, 50, 22, 3),   # CSRF
    (6, 24, 45, 25),   # Privilege Escalation
    (18, 45, 30, 7),   # Information Disclosure
    (12, 38, 40, 10),  # Directory Traversal
    (40, 45, 13, 2),   # Clickjacking
)

# Plausible second categories seen alongside a primary one.
_COMPANIONS = {0: (2,), 1: (6,), 4: (7,), 8: (7,), 2: (0,), 7: (6,)}

_SCORE_RANGES = ((0.1, 3.9), (4.0, 6.9), (7.0, 8.9), (9.0, 10.0))


def _record(rng: random.Random, cve_id: str, taxonomy) -> dict:
    primary = rng.randrange(len(taxonomy.names))
    categories = [primary]
    companion = _COMPANIONS.get(primary)
    if companion and rng.random() < 0.25:
        categories.append(rng.choice(companion))

    severity_idx = rng.choices(range(4), weights=_SEVERITY_WEIGHTS[primary])[0]
    severity = SEVERITY_NAMES[severity_idx].upper()

    phrases = [rng.choice(_TYPE_PHRASES[c]) for c in categories]
    flaw = phrases[0] if len(phrases) == 1 else f"{phrases[0]}, combined with {phrases[1]}"
    description = (
        f"{rng.choice(_PRODUCTS)} before {rng.randrange(1, 9)}."
        f"{rng.randrange(0, 10)}.{rng.randrange(0, 20)} contains {flaw} "
        f"in {rng.choice(_COMPONENTS)}. {rng.choice(_IMPACT_PHRASES[severity_idx])}"
    )

    families: dict[int, list[str]] = {}
    for cwe, idx in taxonomy.cwe_map.items():
        families.setdefault(idx, []).append(cwe)
    cwes = [rng.choice(sorted(families[c])) for c in categories]
    if rng.random() < 0.05:
        cwes.append("CWE-310")

    low, high = _SCORE_RANGES[severity_idx]
    return {
        "cve": {
            "data_type": "CVE",
            "CVE_data_meta": {"ID": cve_id, "ASSIGNER": "cve@example.org"},
            "problemtype": {
                "problemtype_data": [
                    {"description": [{"lang": "en", "value": cwe} for cwe in cwes]}
                ]
            },
            "description": {
                "description_data": [{"lang": "en", "value": description}]
            },
        },
        "impact": {
            "baseMetricV3": {
                "cvssV3": {
                    "version": "3.1",
                    "baseSeverity": severity,
                    "baseScore": round(rng.uniform(low, high), 1),
                }
            }
        },
        "publishedDate": f"2025-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}T00:00Z",
        "lastModifiedDate": "2025-03-01T00:00Z",
    }


def generate_feed(n: int, seed: int = 42, year: int = 2025) -> dict:
    """Build an in-memory feed with n valid records."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    rng = random.Random(seed)
    taxonomy = default_taxonomy()
    items = [
        _record(rng, f"CVE-{year}-{10000 + i}", taxonomy) for i in range(n)
    ]
    return {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": str(n),
        "CVE_data_timestamp": "2025-03-15T00:00Z",
        "CVE_Items": items,
    }


def write_feed(path: str | Path, n: int, seed: int = 42, year: int = 2025) -> Path:
    """Write a generated feed to disk; gzip when path ends with .gz."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(generate_feed(n, seed, year))
    if path.suffix == ".gz":
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        path.write_text(payload, encoding="utf-8")
    return path
