"""Deterministic synthetic fixtures: tickets, language corpora, CPU samples.

Everything is driven by a seeded ``random.Random`` so regenerated
fixtures are byte-identical.
"""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .lexicons import load_bilingual_corpus, load_wordlist

__all__ = [
    "THEMES",
    "make_tickets",
    "write_ticket_fixture",
    "make_language_corpus",
    "make_cpu_samples",
]

_START = datetime(2025, 1, 6, 8, 0, 0, tzinfo=timezone.utc)

# Each theme: (key, category, subcategory, description templates,
# resolution templates, assignment groups, device pool)
THEMES = [
    ("password reset",
     "access", "credentials",
     ["User forgot the password and needs a password reset for account {user}.",
      "Password reset required. The account {user} cannot login to the portal.",
      "Requesting password reset because the old password expired for {user}."],
     ["Performed password reset and verified login.",
      "Reset the password and user confirmed access."],
     ["identity-team"], []),
    ("vpn issues",
     "network", "remote-access",
     ["VPN connection drops every few minutes for user {user}.",
      "Cannot connect to VPN from home office. The VPN client shows a timeout.",
      "VPN issues after the latest client update. Tunnel never establishes."],
     ["Reinstalled the VPN client and connection is stable.",
      "Updated VPN profile and verified the tunnel."],
     ["network-team"], ["VPN_GW_01", "VPN_GW_02"]),
    ("printer faulty",
     "hardware", "printing",
     ["Printer {device} is faulty and prints blank pages.",
      "The printer on floor 3 is broken. Paper jam light stays on.",
      "Faulty printer {device}. Print jobs stay stuck in the queue."],
     ["Replaced the toner and cleared the print queue.",
      "Power cycled the printer and removed the jam."],
     ["field-services"], ["PRT_HQ_03", "PRT_HQ_07"]),
    ("disk space",
     "server", "storage",
     ["Low disk space on server {device}. Only 2 percent free on the data volume.",
      "Disk space alert from monitoring for {device}. Cleanup required.",
      "Server {device} reports low disk space and applications are failing."],
     ["Deleted old log files and extended the volume.",
      "Archived temp data and freed disk space."],
     ["unix-team", "wintel-team"], ["SRV_DB_01", "SRV_APP_02", "SRV_FS_09"]),
    ("backup failed",
     "server", "backup",
     ["Backup scheduler job failed on {device} last night.",
      "The nightly backup failed with a media error on {device}.",
      "Backup job failed. The scheduler reports exit code 2 for {device}."],
     ["Restarted the backup scheduler and reran the job.",
      "Replaced the backup media and verified the job."],
     ["backup-team"], ["SRV_BK_01", "SRV_BK_02"]),
    ("account locked",
     "access", "credentials",
     ["Account locked after too many failed login attempts for {user}.",
      "User {user} is locked out of the domain account again.",
      "Account locked warning shown at login for {user}."],
     ["Unlocked the account and advised on the password policy.",
      "Cleared the lockout and verified login."],
     ["identity-team"], []),
    ("outlook issues",
     "application", "email",
     ["OUTLOOK mailbox cannot reach SRV_MAIL_02 and keeps asking for credentials.",
      "Outlook issues since this morning. Mailbox does not sync.",
      "Outlook mailbox crashes when opening the shared calendar."],
     ["Rebuilt the outlook profile and mail flow restored.",
      "Cleared the cache and outlook works again."],
     ["messaging-team"], ["SRV_MAIL_02"]),
    ("network unreachable",
     "network", "lan",
     ["Unreachable network segment. Cannot ping 10.0.0.1 from the branch.",
      "Network unreachable errors on switch {device} affecting one floor.",
      "The network is unreachable from building B. Gateway 10.0.4.1 times out."],
     ["Rebooted the switch and links recovered.",
      "Replaced a faulty uplink module."],
     ["network-team"], ["SW_BR_11", "SW_BR_12"]),
    ("citrix session",
     "application", "virtualization",
     ["Citrix session freezes and needs a reset for user {user}.",
      "Citrix session reset requested. The desktop hangs at logon.",
      "Frozen citrix session for {user}. Applications do not respond."],
     ["Reset the citrix session and user reconnected.",
      "Logged off the stale session and verified a new logon."],
     ["citrix-team"], ["CTX_FARM_01"]),
    ("high cpu",
     "server", "performance",
     ["High CPU utilization on {device} above 95 percent for an hour.",
      "Monitoring alert: high cpu on server {device}.",
      "Server {device} slow due to high cpu from a runaway process."],
     ["Killed the runaway process and cpu normalized.",
      "Applied the patch and utilization dropped."],
     ["unix-team", "wintel-team"], ["SRV_APP_02", "SRV_DB_01", "SRV_WEB_05"]),
]

_USERS = ["jdoe", "asmith", "mbrown", "lchen", "pgarcia", "tkumar", "enovak", "rwhite"]
_AGENTS = [f"agent-{i:02d}" for i in range(1, 13)]

_CSAT_GOOD = [
    "Great support, the agent was fast and professional.",
    "Excellent service. Issue resolved quickly, thanks.",
    "Very happy with the prompt and helpful response.",
]
_CSAT_BAD = [
    "Terrible experience, the ticket was ignored for days.",
    "Very slow response and the problem is still not fixed.",
    "Frustrated with the repeated outages and poor communication.",
]
_SOCIAL = [
    "The customer portal is down again, this is getting annoying.",
    "Love the new self service portal, works great.",
    "Email outage for two hours today. Not impressed.",
]


def make_tickets(n: int = 1000, seed: int = 20250106) -> list[dict]:
    """Synthetic raw ticket records (JSON-ready dicts) with themed text,
    a propagation signal (network incidents trigger outlook incidents),
    agent skill differences and a spread of SLA outcomes."""
    rng = random.Random(seed)
    sla_by_priority = {1: 240, 2: 480, 3: 1440, 4: 2880}
    # Agent skill multipliers: lower is faster; a few specialists per theme.
    skill = {
        agent: {theme[0]: rng.uniform(0.6, 1.6) for theme in THEMES} for agent in _AGENTS
    }

    records: list[dict] = []
    clock = _START
    i = 0
    pending_followups: list[tuple[datetime, str]] = []
    while len(records) < n:
        i += 1
        clock = clock + timedelta(minutes=rng.expovariate(1 / 90.0))
        roll = rng.random()

        if pending_followups and pending_followups[0][0] <= clock:
            _, forced_theme = pending_followups.pop(0)
            theme = next(t for t in THEMES if t[0] == forced_theme)
        elif roll < 0.04:
            records.append(_csat_record(rng, len(records), clock))
            continue
        elif roll < 0.06:
            records.append(_social_record(rng, len(records), clock))
            continue
        else:
            theme = THEMES[rng.randrange(len(THEMES))]

        key, category, subcategory, desc_templates, res_templates, groups, devices = theme
        device = rng.choice(devices) if devices else None
        user = rng.choice(_USERS)
        language = "english"
        description = rng.choice(desc_templates).format(device=device, user=user)
        resolution = rng.choice(res_templates)
        if rng.random() < 0.12:
            language = rng.choice(["spanish", "spanish", "german"])
            description, resolution = _foreign_text(rng, language)

        priority = rng.choices([1, 2, 3, 4], weights=[1, 3, 4, 2])[0]
        agent = rng.choice(_AGENTS)
        base = {1: 180, 2: 360, 3: 900, 4: 1600}[priority]
        turnaround = rng.gammavariate(2.0, base / 2.0) * skill[agent][key]
        sla = sla_by_priority[priority]
        resolved = rng.random() < 0.92
        record = {
            "ticket_id": f"TCK-{len(records) + 1:06d}",
            "ticket_type": rng.choices(
                ["incident", "problem", "change", "service_request"],
                weights=[70, 8, 10, 12],
            )[0],
            "created_at": clock.isoformat(),
            "priority": priority,
            "category": category,
            "subcategory": subcategory,
            "assignment_group": rng.choice(groups),
            "agent_id": agent,
            "sla_target_minutes": sla,
            "description": description,
            "source_system": "servicedesk",
        }
        if device:
            record["device_id"] = device
        if resolved:
            record["resolved_at"] = (clock + timedelta(minutes=turnaround)).isoformat()
            record["resolution"] = resolution
        if record["ticket_type"] == "change":
            record["related_change_id"] = f"CHG-{rng.randrange(1000):04d}"
        records.append(record)

        # Propagation: network incidents tend to spawn outlook incidents.
        if key == "network unreachable" and rng.random() < 0.8:
            pending_followups.append(
                (clock + timedelta(minutes=rng.uniform(10, 180)), "outlook issues")
            )
    return records[:n]


def _csat_record(rng: random.Random, idx: int, clock: datetime) -> dict:
    score = rng.choices([1, 2, 3, 4, 5], weights=[1, 2, 2, 4, 5])[0]
    comment = rng.choice(_CSAT_BAD if score <= 2 else _CSAT_GOOD)
    return {
        "ticket_id": f"TCK-{idx + 1:06d}",
        "ticket_type": "service_request",
        "created_at": clock.isoformat(),
        "priority": 4,
        "category": "feedback",
        "assignment_group": "csat-desk",
        "description": comment,
        "csat_score": score,
        "csat_comment": comment,
        "source_system": "csat",
    }


def _social_record(rng: random.Random, idx: int, clock: datetime) -> dict:
    return {
        "ticket_id": f"TCK-{idx + 1:06d}",
        "ticket_type": "service_request",
        "created_at": clock.isoformat(),
        "priority": 4,
        "category": "feedback",
        "assignment_group": "csat-desk",
        "description": rng.choice(_SOCIAL),
        "source_system": "social",
    }


_FOREIGN_CACHE: dict[str, list[tuple[str, str]]] = {}


def _foreign_text(rng: random.Random, language: str) -> tuple[str, str]:
    lang_code = {"spanish": "es", "german": "de"}[language]
    if lang_code not in _FOREIGN_CACHE:
        _FOREIGN_CACHE[lang_code] = load_bilingual_corpus(lang_code)
    pairs = _FOREIGN_CACHE[lang_code]
    desc = " ".join(rng.choice(pairs)[0] for _ in range(2))
    res = rng.choice(pairs)[0]
    return desc, res


def write_ticket_fixture(path: str | Path, n: int = 1000, seed: int = 20250106) -> dict:
    """Write the JSONL fixture plus a manifest with per-type counts."""
    records = make_tickets(n, seed)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in records]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    per_type: dict[str, int] = {}
    for r in records:
        per_type[r["ticket_type"]] = per_type.get(r["ticket_type"], 0) + 1
    manifest = {"ticket_count": len(records), "per_type": per_type, "seed": seed}
    out.with_suffix(".manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


# ---------------------------------------------------------------------------
# Language-identification corpus

LATIN_LANGUAGES = (
    "danish", "english", "french", "german", "italian", "portuguese", "spanish", "swedish",
)
CJK_LANGUAGES = ("chinese", "japanese", "korean")


def _cjk_alphabet(language: str, rng: random.Random) -> list[str]:
    if language == "korean":
        return [chr(0xAC00 + rng.randrange(11172)) for _ in range(220)]
    if language == "chinese":
        return [chr(0x4E00 + rng.randrange(0x9FFF - 0x4E00)) for _ in range(300)]
    # Japanese: hiragana plus katakana plus a sprinkle of han
    kana = [chr(c) for c in range(0x3041, 0x3097)] + [chr(c) for c in range(0x30A1, 0x30F7)]
    han = [chr(0x4E00 + rng.randrange(0x9FFF - 0x4E00)) for _ in range(60)]
    return kana + han


def make_language_corpus(
    train_docs: int = 100, test_docs: int = 200, seed: int = 7,
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Synthetic labeled sentences for all eleven languages.

    Latin-script sentences sample 6-14 words from the bundled word lists;
    CJK sentences sample characters from fixed per-language alphabets.
    """
    rng = random.Random(seed)
    wordlists = {lang: load_wordlist(lang) for lang in LATIN_LANGUAGES}
    alphabets = {lang: _cjk_alphabet(lang, rng) for lang in CJK_LANGUAGES}

    def latin_doc(lang: str) -> str:
        words = wordlists[lang]
        return " ".join(rng.choice(words) for _ in range(rng.randint(6, 14)))

    def cjk_doc(lang: str) -> str:
        chars = alphabets[lang]
        return "".join(rng.choice(chars) for _ in range(rng.randint(15, 40)))

    train: list[tuple[str, str]] = []
    test: list[tuple[str, str]] = []
    for lang in LATIN_LANGUAGES + CJK_LANGUAGES:
        make = latin_doc if lang in LATIN_LANGUAGES else cjk_doc
        for _ in range(train_docs):
            train.append((make(lang), lang))
        for _ in range(test_docs):
            test.append((make(lang), lang))
    return train, test


def make_cpu_samples(
    n: int = 1000, seed: int = 13, devices: tuple[str, ...] = ("SRV_DB_01", "SRV_APP_02"),
) -> list[tuple[str, datetime, float]]:
    """Hourly-patterned CPU utilization samples in [0, 1]."""
    rng = random.Random(seed)
    samples = []
    clock = _START
    for _ in range(n):
        clock = clock + timedelta(minutes=rng.uniform(5, 40))
        device = rng.choice(devices)
        daily = 0.4 + 0.3 * (1 if 9 <= clock.hour <= 17 else -1)
        cpu = min(1.0, max(0.0, rng.gauss(daily, 0.15)))
        samples.append((device, clock, cpu))
    return samples
