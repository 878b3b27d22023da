#!/usr/bin/env python3
"""Generates the packaged mini-corpus under data/minicorpus.

Deterministic: rerunning rewrites identical files. The v2/ directory holds the
inputs that differ in the second snapshot (one new certificate, a status
change, an updated security target and a longer CVE feed).
"""

import argparse
import csv
import json
import random
from datetime import date, timedelta
from pathlib import Path

SMARTCARD = "ICs, Smart Cards and Smart Card-Related Devices and Systems"

WORDS = ("the evaluation covers secure boot and key storage for the target of evaluation with "
         "protected memory interfaces audit records and trusted update channels while the developer "
         "supplied guidance documents describing installation configuration and operation under the "
         "assumed operational environment").split()

# (family, serial) produce scheme-specific canonical IDs.
def cert_id(scheme, n, year):
    if scheme == "DE":
        return f"BSI-DSZ-CC-{1000 + n:04d}-{year}"
    if scheme == "FR":
        return f"ANSSI-CC-{year}/{10 + n:02d}"
    if scheme == "US":
        return f"CCEVS-VR-{year % 100:02d}-{100 + n:04d}"
    if scheme == "SE":
        return f"CSEC{year}{100 + n:03d}"
    if scheme == "NO":
        return f"SERTIT-{100 + n:03d}"
    if scheme == "KR":
        return f"KECS-NISS-{500 + n:04d}-{year}"
    raise ValueError(scheme)


def variant(scheme, canonical, rng):
    """A non-canonical spelling some documents use."""
    if scheme == "DE":
        head, num, year = canonical.rsplit("-", 2)
        return f"{head}-{int(num):05d}-{year}"
    if scheme == "FR":
        return canonical.replace("/", "_") if rng.random() < 0.5 else canonical.replace("/", "-")
    if scheme == "NO":
        return "SERTIT-" + str(int(canonical.split("-")[1]))
    if scheme == "KR":
        return canonical.replace("-", "‐")
    return canonical


# Product catalogue: (scheme, category, vendor, title, cpe product tokens or None).
CHIPS = [
    ("Infineon Technologies AG", "Infineon Security Controller M7892 B11 with RSA Library 1.02.013", "infineon"),
    ("Infineon Technologies AG", "Infineon Security Controller M7794 A12 with RSA Library 1.02.013", "infineon"),
    ("NXP Semiconductors", "NXP Secure Smart Card Controller P6022y VB with JCOP 3.2", "nxp"),
    ("NXP Semiconductors", "NXP Secure Smart Card Controller P71D321 with JCOP 4.7", "nxp"),
    ("Microchip", "Microchip AT90SC28880RCFV with Atmel Toolbox 00.03.11.05", "microchip"),
    ("STMicroelectronics", "ST33G1M2 Secure Microcontroller with Cryptographic Library 4.1", "st"),
]

CARDS = [
    ("IDEMIA", "IDEMIA ePassport on IDeal Pass v2.3"),
    ("IDEMIA", "IDEMIA ID-One Cosmo v9.1 Signature Application"),
    ("Thales DIS", "MultiApp V4.0.1 Java Card Platform"),
    ("Thales DIS", "MultiApp V4.1 eTravel Passport Application"),
    ("Giesecke+Devrient", "Sm@rtCafe Expert 7.0 Java Card"),
    ("Giesecke+Devrient", "StarCOS 3.7 Electronic Health Card"),
    ("Infineon Technologies AG", "SLJ 52 Java Card v1.0 eID Application"),
    ("Idemia", "IDeal Citiz v2.1 Residence Permit"),
    ("Gemalto", "IDPrime 940 Smart Card 3.0"),
    ("Oberthur", "Cosmo V8.1 ePassport Basic Access Control"),
]

OTHERS = [
    ("US", "Network and Network-Related Devices and Systems", "Cisco Systems", "Cisco Adaptive Security Appliances 9.8",
     [("a", "cisco", "adaptive_security_appliance_software", "9.8"), ("a", "cisco", "adaptive_security_appliance_software", "9.12")]),
    ("US", "Network and Network-Related Devices and Systems", "Cisco Systems", "Cisco IOS XE 16.9 on Catalyst Switches",
     [("o", "cisco", "ios_xe", "16.9"), ("o", "cisco", "ios_xe", "17.3")]),
    ("US", "Boundary Protection Devices and Systems", "Fortinet", "FortiGate NGFW Appliances with FortiOS 6.2",
     [("o", "fortinet", "fortios", "6.2"), ("o", "fortinet", "fortios", "6.4")]),
    ("US", "Boundary Protection Devices and Systems", "Palo Alto Networks", "Palo Alto Networks PAN-OS 9.0 Firewall",
     [("o", "paloaltonetworks", "pan-os", "9.0")]),
    ("US", "Operating Systems", "Microsoft", "Microsoft Windows Server 2016 10.0",
     [("o", "microsoft", "windows_server_2016", "10.0")]),
    ("US", "Operating Systems", "Red Hat", "Red Hat Enterprise Linux 8.2",
     [("o", "redhat", "enterprise_linux", "8.2"), ("o", "redhat", "enterprise_linux", "7.6")]),
    ("US", "Mobility", "Apple", "Apple iOS 13.0 on iPhone",
     [("o", "apple", "iphone_os", "13.0")]),
    ("US", "Mobility", "Google", "Google Pixel Phones on Android 10.0",
     [("o", "google", "android", "10.0")]),
    ("US", "Databases", "Oracle", "Oracle Database 19c Enterprise Edition 19.3",
     [("a", "oracle", "database", "19.3"), ("a", "oracle", "database", "12.2")]),
    ("US", "Network and Network-Related Devices and Systems", "Juniper Networks", "Junos OS 18.3 for SRX Series",
     [("o", "juniper", "junos", "18.3")]),
    ("US", "Other Devices and Systems", "VMware", "VMware ESXi 6.7 Hypervisor",
     [("o", "vmware", "esxi", "6.7")]),
    ("US", "Other Devices and Systems", "VMware", "VMware vCenter Server 7.0",
     [("a", "vmware", "vcenter_server", "7.0")]),
    ("SE", "Network and Network-Related Devices and Systems", "Ericsson", "Ericsson Router 6000 Series IPOS 20.1",
     [("o", "ericsson", "ipos", "20.1")]),
    ("SE", "Access Control Devices and Systems", "Axis", "Axis Camera Station 5.3",
     [("a", "axis", "camera_station", "5.3")]),
    ("SE", "Operating Systems", "Canonical", "Canonical Ubuntu Linux 18.04 LTS",
     [("o", "canonical", "ubuntu_linux", "18.04")]),
    ("SE", "Data Protection", "Yubico", "YubiKey 5 FIPS Series firmware 5.4",
     [("o", "yubico", "yubikey_5_fips_firmware", "5.4")]),
    ("NO", "Network and Network-Related Devices and Systems", "Huawei", "Huawei USG6000 Firewall 5.0",
     [("o", "huawei", "usg6000_firmware", "5.0")]),
    ("NO", "Multi-Function Devices", "HP", "HP FutureSmart 4.9 for LaserJet",
     [("a", "hp", "futuresmart", "4.9")]),
    ("NO", "Databases", "Microsoft", "Microsoft SQL Server 2019 15.0",
     [("a", "microsoft", "sql_server", "15.0")]),
    ("NO", "Data Protection", "NetApp", "NetApp ONTAP 9.7 Storage",
     [("a", "netapp", "ontap", "9.7")]),
    ("KR", "Network and Network-Related Devices and Systems", "AhnLab", "AhnLab TrusGuard 2.5",
     [("a", "ahnlab", "trusguard", "2.5")]),
    ("KR", "Other Devices and Systems", "Samsung Electronics", "Samsung Knox 3.4 on Galaxy Devices",
     [("a", "samsung", "knox", "3.4")]),
    ("KR", "Databases", "Tmax", "Tibero 6.0 Database Encryption",
     [("a", "tmaxsoft", "tibero", "6.0")]),
    ("KR", "Access Control Devices and Systems", "Piolink", "PAS-K Web Application Firewall 2.0", []),
    ("DE", "Network and Network-Related Devices and Systems", "genua", "genugate Firewall 10.0",
     [("a", "genua", "genugate", "10.0")]),
    ("DE", "Operating Systems", "SUSE", "SUSE Linux Enterprise Server 15.1",
     [("o", "suse", "linux_enterprise_server", "15.1")]),
    ("DE", "Other Devices and Systems", "Bundesdruckerei", "Signature Terminal 2.1", []),
    ("DE", "Data Protection", "Utimaco", "CryptoServer Se-Series Gen2 4.31",
     [("a", "utimaco", "cryptoserver_se", "4.31")]),
    ("FR", "Network and Network-Related Devices and Systems", "Stormshield", "Stormshield Network Security 4.1",
     [("a", "stormshield", "network_security", "4.1")]),
    ("FR", "Data Protection", "Thales", "Thales Luna K7 HSM Firmware 7.3",
     [("o", "thales", "luna_k7_firmware", "7.3")]),
    ("FR", "Products for Digital Signatures", "Wallix", "WALLIX Bastion 7.0",
     [("a", "wallix", "bastion", "7.0")]),
    ("FR", "Other Devices and Systems", "Schneider Electric", "Modicon M580 Controller 2.9",
     [("o", "schneider-electric", "modicon_m580_firmware", "2.9")]),
    ("US", "Network and Network-Related Devices and Systems", "F5", "BIG-IP Local Traffic Manager 14.1",
     [("a", "f5", "big-ip_local_traffic_manager", "14.1")]),
    ("US", "Boundary Protection Devices and Systems", "Check Point", "Check Point Gaia OS 3.10",
     [("o", "checkpoint", "gaia_os", "3.10")]),
    ("US", "Other Devices and Systems", "Splunk", "Splunk Enterprise 8.1",
     [("a", "splunk", "splunk", "8.1")]),
    ("US", "Data Protection", "Dell", "Dell EMC Unity OE 5.0",
     [("o", "dell", "emc_unity_operating_environment", "5.0")]),
    ("SE", "Other Devices and Systems", "Sectra", "Sectra Tiger 7401 Secure Phone 3.2", []),
    ("US", "Network and Network-Related Devices and Systems", "Aruba", "ArubaOS 8.6 Mobility Controllers",
     [("o", "arubanetworks", "arubaos", "8.6")]),
    ("NO", "Other Devices and Systems", "Cisco Systems", "Cisco Firepower Threat Defense 6.4",
     [("a", "cisco", "firepower_threat_defense", "6.4")]),
    ("US", "Operating Systems", "IBM", "IBM z/OS 2.4",
     [("o", "ibm", "z\\/os", "2.4")]),
    ("US", "Databases", "IBM", "IBM DB2 11.5 for Linux UNIX and Windows",
     [("a", "ibm", "db2", "11.5")]),
    ("SE", "Boundary Protection Devices and Systems", "Clavister", "Clavister cOS Core 12.0",
     [("o", "clavister", "cos_core", "12.0")]),
]

# CPE entries that never match a certified product (wrong version or product).
DECOY_CPES = [
    ("a", "cisco", "identity_services_engine", "2.4"),
    ("o", "fortinet", "fortios", "5.4"),
    ("a", "oracle", "mysql", "8.0"),
    ("o", "microsoft", "windows_10", "10.0"),
    ("a", "vmware", "workstation", "15.5"),
    ("a", "infineon", "trusted_platform_module_firmware", "4.32"),
    ("a", "nxp", "jcop", "*"),
]

CWES = ["CWE-79", "CWE-787", "CWE-20", "CWE-125", "CWE-119", "CWE-200", "CWE-287", "CWE-310", "CWE-400",
        "CWE-22", "CWE-416", "CWE-352"]

ALIASES = [
    ("Cisco Systems", "cisco"),
    ("Infineon Technologies AG", "infineon"),
    ("NXP Semiconductors", "nxp"),
    ("STMicroelectronics", "st"),
    ("Palo Alto Networks", "paloaltonetworks"),
    ("Red Hat", "redhat"),
    ("Juniper Networks", "juniper"),
    ("Check Point", "checkpoint"),
    ("Aruba", "arubanetworks"),
    ("Samsung Electronics", "samsung"),
    ("Tmax", "tmaxsoft"),
    ("Schneider Electric", "schneider-electric"),
]


def rand_date(rng, start, end):
    span = (end - start).days
    return start + timedelta(days=rng.randrange(span + 1))


def filler(rng, n):
    return " ".join(rng.choice(WORDS) for _ in range(n))


def paragraph(rng, lines):
    return "\n".join(filler(rng, rng.randint(8, 14)) for _ in range(lines))


def cpe_uri(part, vendor, product, version):
    return f"cpe:2.3:{part}:{vendor}:{product}:{version}:*:*:*:*:*:*:*"


class Cert:
    def __init__(self, **kw):
        self.__dict__.update(kw)


def build(seed=7):
    rng = random.Random(seed)
    certs = []
    serial = {s: 0 for s in ("DE", "FR", "US", "SE", "NO", "KR")}

    def new_cert(scheme, category, vendor, title, cpes, sar_max=None):
        n = serial[scheme]
        serial[scheme] += 1
        cert_date = rand_date(rng, date(2013, 1, 1), date(2021, 12, 31))
        cid = cert_id(scheme, n, cert_date.year)
        c = Cert(scheme=scheme, category=category, vendor=vendor, title=title, cpes=cpes, id=cid,
                 cert_date=cert_date, refs=[], maintenance=[], index=len(certs))
        certs.append(c)
        return c

    chips = [new_cert("DE", SMARTCARD, v, t, []) for v, t, _ in CHIPS]
    for c, (_, _, cpe_vendor) in zip(chips, CHIPS):
        c.cpe_vendor = cpe_vendor
    chips[0].cpes = [("a", "infineon", "rsa_library", "1.02.013")]
    chips[1].cpes = [("a", "infineon", "rsa_library", "1.02.013")]
    chips[2].cpes = [("a", "nxp", "jcop", "3.2")]
    chips[3].cpes = [("a", "nxp", "jcop", "4.7")]
    chips[4].cpes = [("a", "microchip", "atmel_toolbox", "00.03.11.05")]
    chips[5].cpes = [("a", "st", "cryptographic_library", "4.1")]

    cards = []
    for i, (vendor, title) in enumerate(CARDS):
        scheme = "FR" if i % 3 else "DE"
        c = new_cert(scheme, SMARTCARD, vendor, title, [])
        c.refs = [chips[i % len(chips)]]
        if i % 4 == 0:
            c.refs.append(chips[(i + 1) % len(chips)])
        cards.append(c)

    others = [new_cert(*o) for o in OTHERS]
    # A few products are evaluated on top of others (e.g. appliances on an OS).
    for c in others:
        if rng.random() < 0.25:
            target = rng.choice(others)
            if target is not c:
                c.refs.append(target)

    for c in certs:
        c.cpe_uris = [cpe_uri(*t) for t in c.cpes]
        if c.category == SMARTCARD:
            c.eal = rng.choice([(4, True), (5, True), (6, True)])
            c.sars = {"AVA_VAN": 5, "ALC_DVS": 2, "ADV_FSP": rng.choice([4, 5])}
        else:
            level = rng.choice([1, 2, 2, 3, 3, 4, 4, 5])
            c.eal = (rng.choice([2, 3, 4]), rng.random() < 0.5)
            c.sars = {"AVA_VAN": level, "ALC_FLR": rng.choice([1, 2, 3]), "ADV_FSP": rng.choice([2, 3, 4])}
        validity = rng.choice([5 * 365, 5 * 365, 5 * 365, 4 * 365, 3 * 365])
        if c.index in (20, 40):
            validity = 364
        if c.index == 30:
            validity = 365
        if c.index == 45:
            validity = 200
        c.expiry = c.cert_date + timedelta(days=validity)
        c.status = "archived" if c.expiry < date(2024, 6, 30) else "active"
        if rng.random() < 0.3:
            c.maintenance.append(c.cert_date + timedelta(days=rng.randint(90, 700)))

    # CVEs: products with higher AVA_VAN levels get fewer of them.
    cves = []
    vulnerable = [c for c in certs if c.cpe_uris]
    weights = [max(0.5, 6 - c.sars["AVA_VAN"]) for c in vulnerable]
    for i in range(40):
        c = rng.choices(vulnerable, weights=weights)[0]
        affected = {rng.choice(c.cpe_uris)}
        if rng.random() < 0.2:
            affected.add(cpe_uri(*rng.choice(DECOY_CPES)))
        published = rand_date(rng, c.cert_date - timedelta(days=700), date(2024, 5, 31))
        score = round(rng.uniform(3.0, 9.8), 1)
        cwes = sorted(set(rng.sample(CWES, rng.choice([1, 1, 2]))))
        cves.append((f"CVE-{published.year}-{1000 + i * 37:05d}", published, score, cwes, sorted(affected)))
    # Pin the ROCA-style case: a chip library CVE shared by every product on it.
    cves.append(("CVE-2017-15361", date(2017, 10, 16), 5.9, ["CWE-310"],
                 [cpe_uri("a", "infineon", "rsa_library", "1.02.013")]))
    return certs, cves


def report_name(c):
    return f"report_{c.index:03d}.txt"


def st_name(c, suffix=""):
    return f"st_{c.index:03d}{suffix}.txt"


def write_report(rng, c):
    eal = f"EAL{c.eal[0]}" + ("+" if c.eal[1] else "")
    sar_text = ", ".join(f"{k}.{v}" for k, v in sorted(c.sars.items()))
    front = (f"Certification Report\n{c.title}\n{c.vendor}\n{c.id}\n{paragraph(rng, 3)}\n\f")
    body = [
        f"Certification Report {c.id}",
        paragraph(rng, 4),
        f"The product was evaluated at {eal}. The assurance package is augmented by {sar_text}.",
        paragraph(rng, 4),
    ]
    for r in c.refs:
        body.append(f"The evaluation reuses results of the platform certified under {variant(r.scheme, r.id, rng)}.")
    body.append(f"This report {c.id} ends here.")
    body.append(paragraph(rng, 2))
    return front + "\n".join(body) + "\n"


def write_st(rng, c, extra_refs=()):
    eal = f"EAL{c.eal[0]}" + (" augmented" if c.eal[1] else "")
    lines = [f"Security Target for {c.title}", paragraph(rng, 5), f"Evaluation assurance level: {eal}"]
    for k, v in sorted(c.sars.items()):
        lines.append(f"{k}.{v} {filler(rng, 6)}")
    if c.category == SMARTCARD:
        lines.append("The TOE resists DPA, SPA and fault injection attacks and uses RSA and AES.")
    for r in list(c.refs) + list(extra_refs):
        lines.append(f"Composite evaluation on {r.title} ({r.id}).")
    lines.append(paragraph(rng, 3))
    return "\n".join(lines) + "\n"


def row(c, st=None):
    eal = f"EAL{c.eal[0]}" + ("+" if c.eal[1] else "")
    return {
        "scheme": c.scheme, "category": c.category, "title": c.title, "vendor": c.vendor,
        "cert_date": c.cert_date.isoformat(), "expiry_date": c.expiry.isoformat(), "status": c.status,
        "eal": eal, "report_path": report_name(c), "target_path": st or st_name(c),
    }


FIELDS = ["scheme", "category", "title", "vendor", "cert_date", "expiry_date", "status", "eal", "report_path",
          "target_path"]


def write_csv(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def html_line(c, rng_meta):
    rec = {"scheme": c.scheme, "title": c.title, "vendor": c.vendor, "cert_date": c.cert_date.isoformat(),
           "status": c.status, "report_path": "pdf/" + report_name(c), "target_path": st_name(c),
           "maintenance_updates": [{"date": d.isoformat(), "path": f"mu_{c.index:03d}_{k}.txt"}
                                   for k, d in enumerate(c.maintenance)]}
    if rng_meta.random() < 0.5:
        rec["pdf_metadata"] = f"Certification Report {c.id}"
    return json.dumps(rec, sort_keys=True)


def cpe_dict_lines(certs):
    uris = set()
    for c in certs:
        uris.update(c.cpe_uris)
    uris.update(cpe_uri(*t) for t in DECOY_CPES)
    return sorted(uris)


def cve_line(cve):
    cid, published, score, cwes, cpes = cve
    return f"{cid}|{published.isoformat()}|{score}|{','.join(cwes)}|{','.join(cpes)}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "minicorpus"))
    args = ap.parse_args()
    out = Path(args.out)
    (out / "artifacts").mkdir(parents=True, exist_ok=True)
    (out / "nvd").mkdir(parents=True, exist_ok=True)
    (out / "v2" / "nvd").mkdir(parents=True, exist_ok=True)

    certs, cves = build()
    text_rng = random.Random(11)
    for c in certs:
        (out / "artifacts" / report_name(c)).write_text(write_report(text_rng, c))
        (out / "artifacts" / st_name(c)).write_text(write_st(text_rng, c))
        for k, d in enumerate(c.maintenance):
            body = (f"Maintenance Report {c.id}\nUpdate of {c.title} dated {d.isoformat()}\n"
                    f"{paragraph(text_rng, 4)}\nThe certificate {variant(c.scheme, c.id, text_rng)} remains valid.\n")
            (out / "artifacts" / f"mu_{c.index:03d}_{k}.txt").write_text(body)

    write_csv(out / "certs.csv", [row(c) for c in certs])
    meta_rng = random.Random(3)
    (out / "html_records.jsonl").write_text("".join(html_line(c, meta_rng) + "\n" for c in certs))
    (out / "nvd" / "cpe_dict.txt").write_text("\n".join(cpe_dict_lines(certs)) + "\n")
    (out / "nvd" / "cve_feed.txt").write_text("".join(cve_line(v) + "\n" for v in cves))
    (out / "nvd" / "vendor_aliases.txt").write_text(
        "# manufacturer  cpe_vendor\n" + "".join(f"{a.replace(' ', '_')} {b}\n" for a, b in ALIASES))

    # Second snapshot: a new certificate, one moved to the archive, an updated
    # ST citing a chip, and CVEs published after the first snapshot.
    v2_rng = random.Random(13)
    new = Cert(scheme="DE", category=SMARTCARD, vendor="IDEMIA", title="IDEMIA ID-One Cosmo v10 Platform",
               cpes=[], id="BSI-DSZ-CC-1099-2024", cert_date=date(2024, 7, 15), refs=[certs[3]],
               maintenance=[], index=len(certs), eal=(5, True), sars={"AVA_VAN": 5, "ALC_DVS": 2},
               expiry=date(2029, 7, 15), status="active", cpe_uris=[])
    (out / "artifacts" / report_name(new)).write_text(write_report(v2_rng, new))
    (out / "artifacts" / st_name(new)).write_text(write_st(v2_rng, new))
    updated = certs[len(CHIPS) + len(CARDS) + 1]
    (out / "artifacts" / st_name(updated, "_v2")).write_text(write_st(v2_rng, updated, extra_refs=[certs[0]]))
    rows = []
    for c in certs:
        r = row(c, st_name(c, "_v2") if c is updated else None)
        if c.index == 27:
            r["status"] = "archived"
        rows.append(r)
    rows.append(row(new))
    write_csv(out / "v2" / "certs.csv", rows)
    meta_rng = random.Random(3)
    (out / "v2" / "html_records.jsonl").write_text("".join(html_line(c, meta_rng) + "\n" for c in certs + [new]))
    extra = [
        ("CVE-2024-31001", date(2024, 8, 2), 8.1, ["CWE-787"], [certs[len(CHIPS) + len(CARDS)].cpe_uris[0]]),
        ("CVE-2024-31002", date(2024, 8, 20), 6.5, ["CWE-79"], [certs[len(CHIPS) + len(CARDS) + 10].cpe_uris[0]]),
    ]
    (out / "v2" / "nvd" / "cve_feed.txt").write_text("".join(cve_line(v) + "\n" for v in cves + extra))
    (out / "v2" / "nvd" / "cpe_dict.txt").write_text((out / "nvd" / "cpe_dict.txt").read_text())
    (out / "v2" / "nvd" / "vendor_aliases.txt").write_text((out / "nvd" / "vendor_aliases.txt").read_text())
    print(f"{len(certs)} certificates, {len(cves)} CVEs -> {out}")


if __name__ == "__main__":
    main()
