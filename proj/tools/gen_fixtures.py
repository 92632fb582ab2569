#!/usr/bin/env python3
"""Writes the synthetic MIMIC-III-shaped fixtures under fixtures/.

Output is a pure function of the seed, so re-running reproduces the committed
files byte for byte. Nothing here is derived from real patient data.
"""

import argparse
import csv
import json
import random
from datetime import datetime, timedelta
from pathlib import Path

HEADERS = {
    "PATIENTS": ["ROW_ID", "SUBJECT_ID", "GENDER", "DOB", "DOD", "DOD_HOSP", "DOD_SSN", "EXPIRE_FLAG"],
    "ADMISSIONS": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "ADMITTIME", "DISCHTIME", "DEATHTIME",
                   "ADMISSION_TYPE", "ADMISSION_LOCATION", "DISCHARGE_LOCATION", "INSURANCE",
                   "DIAGNOSIS", "HOSPITAL_EXPIRE_FLAG"],
    "DIAGNOSES_ICD": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "SEQ_NUM", "ICD9_CODE"],
    "PROCEDURES_ICD": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "SEQ_NUM", "ICD9_CODE"],
    "PRESCRIPTIONS": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "ICUSTAY_ID", "STARTDATE", "ENDDATE",
                      "DRUG_TYPE", "DRUG", "ROUTE", "DOSE_VAL_RX", "DOSE_UNIT_RX"],
    "CHARTEVENTS": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "ICUSTAY_ID", "ITEMID", "CHARTTIME",
                    "VALUE", "VALUENUM", "VALUEUOM"],
    "LABEVENTS": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "ITEMID", "CHARTTIME", "VALUE", "VALUENUM",
                  "VALUEUOM", "FLAG"],
    "NOTEEVENTS": ["ROW_ID", "SUBJECT_ID", "HADM_ID", "CHARTDATE", "CHARTTIME", "STORETIME",
                   "CATEGORY", "DESCRIPTION", "CGID", "ISERROR", "TEXT"],
    "D_ICD_DIAGNOSES": ["ROW_ID", "ICD9_CODE", "SHORT_TITLE", "LONG_TITLE"],
    "D_ICD_PROCEDURES": ["ROW_ID", "ICD9_CODE", "SHORT_TITLE", "LONG_TITLE"],
    "D_ITEMS": ["ROW_ID", "ITEMID", "LABEL", "DBSOURCE", "LINKSTO"],
    "D_LABITEMS": ["ROW_ID", "ITEMID", "LABEL", "FLUID", "CATEGORY"],
}

DIAGNOSES = {
    "42731": "Atrial fibrillation",
    "5307": "Gastroesophageal laceration-hemorrhage syndrome",
    "45340": "Acute venous embolism and thrombosis of unspecified deep vessels of lower extremity",
    "4280": "Congestive heart failure, unspecified",
    "V551": "Attention to gastrostomy",
    "5849": "Acute kidney failure, unspecified",
    "4019": "Unspecified essential hypertension",
    "25000": "Diabetes mellitus without mention of complication, type II or unspecified type",
    "E8792": "Other specified procedures as the cause of abnormal reaction of patient",
    "2851": "Acute posthemorrhagic anemia",
    "486": "Pneumonia, organism unspecified",
}

PROCEDURES = {
    "4311": "Percutaneous [endoscopic] gastrostomy [PEG]",
    "9604": "Insertion of endotracheal tube",
    "9671": "Continuous invasive mechanical ventilation for less than 96 consecutive hours",
    "3893": "Venous catheterization, not elsewhere classified",
    "4513": "Other endoscopy of small intestine",
}

# itemid -> (label, unit, low, high, decimals)
CHART_ITEMS = {
    220045: ("Heart Rate", "bpm", 60, 130, 0),
    220179: ("Non Invasive Blood Pressure systolic", "mmHg", 90, 160, 0),
    220277: ("O2 saturation pulseoxymetry", "%", 90, 100, 0),
    220210: ("Respiratory Rate", "insp/min", 12, 28, 0),
    220615: ("Creatinine", "mg/dL", 0.5, 1.6, 1),
    227457: ("Platelet Count", "K/uL", 150, 260, 1),
    220228: ("Hemoglobin", "g/dL", 9.0, 12.5, 1),
    227467: ("INR", "", 1.0, 3.0, 1),
}
# Seen for a single admission, so below the chart-vocabulary threshold.
RARE_CHART_ITEMS = {
    223762: ("Temperature Celsius", "?C", 36.5, 38.5, 1),
    224639: ("Daily Weight", "kg", 55, 95, 1),
}

LAB_ITEMS = {
    50912: ("Creatinine", "mg/dL", 0.5, 1.6, 1),
    51265: ("Platelet Count", "K/uL", 150, 260, 0),
    51222: ("Hemoglobin", "g/dL", 9.0, 12.5, 1),
    51237: ("INR(PT)", "", 1.0, 3.0, 1),
}

# drug -> (routes, dose value, dose unit, share of admissions)
DRUGS = {
    "Heparin Sodium": (["IV"], "5000", "UNIT", 0.9),
    "Metoprolol Tartrate": (["PO", "IV"], "25", "mg", 0.8),
    "Warfarin": (["PO"], "5", "mg", 0.7),
    "Furosemide": (["IV"], "40", "mg", 0.5),
    "Magnesium Sulfate": (["IV"], "2", "gm", 0.4),
    "Pantoprazole": (["IV", "PO"], "40", "mg", 0.35),
    "Haloperidol": (["IV"], "2", "mg", 0.15),
    "Levofloxacin": (["IV"], "750", "mg", 0.04),
}

FILLER = ("patient was stable overnight with no acute events and tolerated diet well while "
          "family remained at bedside and plan of care was reviewed with team").split()

FIRST_WORDS = ["stable", "improving", "comfortable", "resting", "alert"]


def ts(d):
    return d.strftime("%Y-%m-%d %H:%M:%S")


def day(d):
    return d.strftime("%Y-%m-%d") + " 00:00:00"


class Writer:
    def __init__(self):
        self.rows = {name: [] for name in HEADERS}

    def add(self, table, **fields):
        row = {h: "" for h in HEADERS[table]}
        row["ROW_ID"] = str(len(self.rows[table]) + 1)
        for k, v in fields.items():
            if k not in row:
                raise KeyError(f"{table} has no column {k}")
            row[k] = "" if v is None else str(v)
        self.rows[table].append(row)

    def write(self, out_dir):
        out_dir.mkdir(parents=True, exist_ok=True)
        for table, rows in self.rows.items():
            with open(out_dir / f"{table}.csv", "w", newline="", encoding="utf-8") as f:
                w = csv.DictWriter(f, fieldnames=HEADERS[table], lineterminator="\n")
                w.writeheader()
                w.writerows(rows)


def write_dictionaries(w, chart_items, lab_items):
    for code, title in DIAGNOSES.items():
        w.add("D_ICD_DIAGNOSES", ICD9_CODE=code, SHORT_TITLE=title[:24], LONG_TITLE=title)
    # Duplicate code: the first description wins and a warning is logged.
    w.add("D_ICD_DIAGNOSES", ICD9_CODE="42731", SHORT_TITLE="Atrial fib", LONG_TITLE="Atrial fibrillation (duplicate)")
    for code, title in PROCEDURES.items():
        w.add("D_ICD_PROCEDURES", ICD9_CODE=code, SHORT_TITLE=title[:24], LONG_TITLE=title)
    for item, spec in chart_items.items():
        w.add("D_ITEMS", ITEMID=item, LABEL=spec[0], DBSOURCE="metavision", LINKSTO="chartevents")
    for item, spec in lab_items.items():
        w.add("D_LABITEMS", ITEMID=item, LABEL=spec[0], FLUID="Blood", CATEGORY="Chemistry")


def value(rng, spec):
    _, unit, low, high, decimals = spec
    v = round(rng.uniform(low, high), decimals)
    text = f"{v:.{decimals}f}"
    return text, text, unit


def radiology_text(rng, when):
    return (f"[**{when:%Y-%m-%d}**] 8:15 AM\nCHEST (PORTABLE AP)\nReason: assess line placement\n"
            f"Admitting Diagnosis: ATRIAL FIBRILLATION\n"
            f"______________________________________________________________________________\n"
            f"FINAL REPORT\nPORTABLE CHEST: Comparison with prior study. The endotracheal tube "
            f"terminates {rng.randint(3, 6)} cm above the carina. Mild cardiomegaly is stable. "
            f"No pneumothorax.\n\nIMPRESSION: Lines and tubes in standard position.")


def echo_text(rng):
    ef = rng.choice([35, 40, 45, 55, 60])
    return (f"PATIENT/TEST INFORMATION:\nIndication: Atrial fibrillation. Left ventricular function.\n"
            f"Height: (in) 70\nWeight (lb): 180\n\nFindings: Mildly dilated left atrium.\n\n"
            f"Conclusions:\nThe left atrium is mildly dilated. Left ventricular systolic function is "
            f"mildly depressed (LVEF = {ef}%). There is no pericardial effusion.\n\n"
            f"Electronically signed by [**Name (NI) 1234**], MD on [**2150-01-01**]")


def nursing_text(rng):
    return (f"Neuro: alert and oriented x3, {rng.choice(FIRST_WORDS)}.\n"
            f"CV: HR {rng.randint(70, 120)} afib, SBP {rng.randint(95, 140)}. Heparin gtt continued.\n"
            f"Resp: lungs clear, sats {rng.randint(93, 99)}% on 2L NC.\n"
            f"GI: PEG site clean, dry and intact -- no drainage!!\n"
            f"Plan: continue current management, family updated by [**Name6 (MD) 4321**].")


def physician_text(rng):
    return (f"Chief complaint: rapid atrial fibrillation\n"
            f"Assessment and plan: {rng.randint(55, 90)} y/o with AF, GI bleed s/p PEG. "
            f"Rate control with metoprolol, restart heparin tonight, bridge to warfarin.")


def discharge_text(rng, subject, hadm, admit, disch, age, gender, dx, px, drugs):
    pron = "He" if gender == "M" else "She"
    dx_text = ", ".join(DIAGNOSES[c].lower() for c in dx[:3])
    med_text = ", ".join(d.lower() for d in drugs) or "none"
    proc = PROCEDURES[px[0]].lower() if px else "no procedures"
    return (f"Admission Date:  [**{admit:%Y-%m-%d}**]     Discharge Date:  [**{disch:%Y-%m-%d}**]\n\n"
            f"Date of Birth:  [**2040-03-16**]     Sex:   {gender}\n\n"
            f"Service: MEDICINE\n\n"
            f"HISTORY OF PRESENT ILLNESS:\nThe patient is a {age} year old with {dx_text}. "
            f"{pron} was admitted for management of rapid atrial fibrillation.\n\n"
            f"HOSPITAL COURSE:\n{pron} underwent {proc} which was tolerated well. "
            f"Heart rate was controlled and anticoagulation was resumed.\n\n"
            f"DISCHARGE MEDICATIONS:\n{med_text}\n\n"
            f"DISCHARGE DISPOSITION:\nExtended Care, seen by [**Name (NI) {rng.randint(100, 999)}**].\n\n"
            f"DISCHARGE DIAGNOSIS:\n{dx_text}\n\n"
            f"Followup Instructions:\nFollow up with [**Hospital 1234**] clinic in [**1-23**] weeks.")


def exact_words(n):
    words = []
    while len(words) < n:
        words.extend(FILLER)
    return " ".join(words[:n])


def add_admission(w, rng, subject, hadm, admit, disch, *, gender, age, ds=True, ds_text=None,
                  chart_items=CHART_ITEMS, rare_chart=None, drug_pool=DRUGS, addendum=False):
    admit_dx = rng.choice(["ATRIAL FIBRILLATION", "GI BLEED", "CONGESTIVE HEART FAILURE"])
    w.add("ADMISSIONS", SUBJECT_ID=subject, HADM_ID=hadm, ADMITTIME=ts(admit), DISCHTIME=ts(disch),
          ADMISSION_TYPE=rng.choice(["EMERGENCY", "URGENT", "ELECTIVE"]),
          ADMISSION_LOCATION="EMERGENCY ROOM ADMIT", DISCHARGE_LOCATION="REHAB/DISTINCT PART HOSP",
          INSURANCE="Medicare", DIAGNOSIS=admit_dx, HOSPITAL_EXPIRE_FLAG=0)

    dx = ["42731"] + rng.sample([c for c in DIAGNOSES if c != "42731"], rng.randint(1, 6))
    for i, code in enumerate(dx, 1):
        w.add("DIAGNOSES_ICD", SUBJECT_ID=subject, HADM_ID=hadm, SEQ_NUM=i, ICD9_CODE=code)
    px = rng.sample(list(PROCEDURES), rng.randint(0, 3))
    if "4311" not in px and rng.random() < 0.6:
        px.insert(0, "4311")
    for i, code in enumerate(px, 1):
        w.add("PROCEDURES_ICD", SUBJECT_ID=subject, HADM_ID=hadm, SEQ_NUM=i, ICD9_CODE=code)

    los_days = (disch.date() - admit.date()).days
    given = []
    for drug, (routes, dose, unit, share) in drug_pool.items():
        if rng.random() >= share:
            continue
        given.append(drug)
        for _ in range(rng.randint(1, 3)):
            start = admit.date() + timedelta(days=rng.randint(0, los_days))
            end = start + timedelta(days=rng.randint(0, 2))
            w.add("PRESCRIPTIONS", SUBJECT_ID=subject, HADM_ID=hadm, STARTDATE=day(datetime.combine(start, datetime.min.time())),
                  ENDDATE=day(datetime.combine(end, datetime.min.time())), DRUG_TYPE="MAIN", DRUG=drug,
                  ROUTE=rng.choice(routes), DOSE_VAL_RX=dose, DOSE_UNIT_RX=unit)

    span = (disch - admit).total_seconds()
    items = dict(chart_items)
    if rare_chart:
        items.update(rare_chart)
    for item, spec in items.items():
        for _ in range(rng.randint(1, 3)):
            when = admit + timedelta(seconds=int(rng.uniform(0.02, 0.98) * span) // 60 * 60)
            text, num, unit = value(rng, spec)
            w.add("CHARTEVENTS", SUBJECT_ID=subject, HADM_ID=hadm, ICUSTAY_ID=hadm + 100000, ITEMID=item,
                  CHARTTIME=ts(when), VALUE=text, VALUENUM=num, VALUEUOM=unit)
    # One observation before admission; the timeline drops it.
    spec = CHART_ITEMS[220045]
    text, num, unit = value(rng, spec)
    w.add("CHARTEVENTS", SUBJECT_ID=subject, HADM_ID=hadm, ICUSTAY_ID=hadm + 100000, ITEMID=220045,
          CHARTTIME=ts(admit - timedelta(hours=3)), VALUE=text, VALUENUM=num, VALUEUOM=unit)
    for item, spec in LAB_ITEMS.items():
        when = admit + timedelta(seconds=int(rng.uniform(0.1, 0.9) * span) // 60 * 60)
        text, num, unit = value(rng, spec)
        w.add("LABEVENTS", SUBJECT_ID=subject, HADM_ID=hadm, ITEMID=item, CHARTTIME=ts(when),
              VALUE=text, VALUENUM=num, VALUEUOM=unit)

    def note(category, description, when, text, with_time=True):
        w.add("NOTEEVENTS", SUBJECT_ID=subject, HADM_ID=hadm, CHARTDATE=day(when),
              CHARTTIME=ts(when) if with_time else "", STORETIME=ts(when + timedelta(minutes=20)) if with_time else "",
              CATEGORY=category, DESCRIPTION=description, CGID=rng.randint(14000, 21000), ISERROR="", TEXT=text)

    def inside():
        return admit + timedelta(seconds=int(rng.uniform(0.05, 0.95) * span) // 60 * 60)

    note("Nursing", "Nursing Progress Note", inside(), nursing_text(rng))
    when = inside()
    note("Radiology", "CHEST (PORTABLE AP)", when, radiology_text(rng, when))
    if rng.random() < 0.6:
        note("Echo", "Report", inside(), echo_text(rng), with_time=False)
    if rng.random() < 0.5:
        note("Physician ", "Physician Resident Progress Note", inside(), physician_text(rng))
    if rng.random() < 0.3:
        note("ECG", "Report", inside(), "Atrial fibrillation with rapid ventricular response. Nonspecific ST-T changes.",
             with_time=False)
    if ds:
        text = ds_text or discharge_text(rng, subject, hadm, admit, disch, age, "M" if gender == "M" else "F",
                                         dx, px, given)
        note("Discharge summary", "Report", disch, text, with_time=False)
        if addendum:
            note("Discharge summary", "Addendum", disch + timedelta(days=2),
                 "Addendum: patient's warfarin dose was adjusted at rehab.", with_time=False)


def generate_main(out_dir, rng):
    w = Writer()
    write_dictionaries(w, {**CHART_ITEMS, **RARE_CHART_ITEMS}, LAB_ITEMS)

    subject = 100
    hadm = 150000

    def patient(gender, dob, dod=None):
        nonlocal subject
        subject += 1
        w.add("PATIENTS", SUBJECT_ID=subject, GENDER=gender, DOB=ts(dob), DOD=ts(dod) if dod else "",
              EXPIRE_FLAG=1 if dod else 0)
        return subject

    def next_hadm():
        nonlocal hadm
        hadm += 1
        return hadm

    # Regular cohort members.
    for i in range(24):
        gender = rng.choice("MF")
        admit = datetime(rng.randint(2100, 2190), rng.randint(1, 12), rng.randint(1, 28), rng.randint(0, 23),
                         rng.choice([0, 15, 30, 45]))
        age = rng.randint(25, 88)
        dob = datetime(admit.year - age - 1, rng.randint(1, 12), rng.randint(1, 28))
        age = int((admit - dob).total_seconds() // (365.25 * 86400))
        s = patient(gender, dob)
        disch = admit + timedelta(days=rng.randint(1, 5), hours=rng.randint(1, 20))
        add_admission(w, rng, s, next_hadm(), admit, disch, gender=gender, age=age,
                      rare_chart=RARE_CHART_ITEMS if i == 0 else None, addendum=i == 1)
        if i % 8 == 3:
            # A second admission for the same subject.
            admit2 = disch + timedelta(days=rng.randint(30, 300))
            add_admission(w, rng, s, next_hadm(), admit2, admit2 + timedelta(days=2, hours=4),
                          gender=gender, age=age + 1)

    # Age boundary: 19.0 years at admission is included, one hour earlier is 18.
    dob = datetime(2120, 1, 1)
    s = patient("F", dob)
    admit = dob + timedelta(days=19 * 365.25)
    add_admission(w, rng, s, next_hadm(), admit, admit + timedelta(days=3), gender="F", age=19)
    s = patient("M", dob)
    admit = dob + timedelta(days=19 * 365.25) - timedelta(hours=1)
    add_admission(w, rng, s, next_hadm(), admit, admit + timedelta(days=3), gender="M", age=18)

    # LOS boundary: exactly 7 days is excluded, 6 days 23 hours is included.
    for los in (timedelta(days=7), timedelta(days=6, hours=23)):
        s = patient("M", datetime(2080, 5, 5))
        admit = datetime(2150, 3, 1, 10, 0, 0)
        add_admission(w, rng, s, next_hadm(), admit, admit + los, gender="M", age=69)

    # DS length boundary: 500 words included, 501 excluded.
    for words in (500, 501):
        s = patient("F", datetime(2090, 7, 7))
        admit = datetime(2160, 9, 1, 8, 30, 0)
        add_admission(w, rng, s, next_hadm(), admit, admit + timedelta(days=2), gender="F", age=70,
                      ds_text=exact_words(words))

    # No discharge summary.
    s = patient("M", datetime(2070, 2, 2))
    admit = datetime(2140, 4, 4, 4, 0, 0)
    add_admission(w, rng, s, next_hadm(), admit, admit + timedelta(days=2), gender="M", age=70, ds=False)

    # De-identified age above 89: DOB shifted 300 years back, clamped to 90.
    s = patient("F", datetime(1850, 1, 1), dod=datetime(2152, 6, 1))
    admit = datetime(2150, 6, 1, 12, 0, 0)
    add_admission(w, rng, s, next_hadm(), admit, admit + timedelta(days=4), gender="F", age=90)

    # Admission whose subject is missing from PATIENTS.
    admit = datetime(2170, 1, 1, 1, 0, 0)
    w.add("ADMISSIONS", SUBJECT_ID=99999, HADM_ID=next_hadm(), ADMITTIME=ts(admit),
          DISCHTIME=ts(admit + timedelta(days=1)), ADMISSION_TYPE="EMERGENCY", DIAGNOSIS="SEPSIS")

    # Malformed rows, each rejected with a reason.
    w.add("PATIENTS", SUBJECT_ID=999, GENDER="X", DOB=ts(datetime(2100, 1, 1)))
    w.add("PATIENTS", SUBJECT_ID="abc", GENDER="M", DOB=ts(datetime(2100, 1, 1)))
    w.add("ADMISSIONS", SUBJECT_ID=101, HADM_ID=next_hadm(), ADMITTIME="2150-02-30 10:00:00",
          DISCHTIME="2150-03-02 10:00:00", ADMISSION_TYPE="EMERGENCY", DIAGNOSIS="FALL")
    w.add("PRESCRIPTIONS", SUBJECT_ID=101, HADM_ID=150001, STARTDATE="2150-01-05 00:00:00",
          ENDDATE="2150-01-03 00:00:00", DRUG="Warfarin", ROUTE="PO", DOSE_VAL_RX="5", DOSE_UNIT_RX="mg")
    w.add("CHARTEVENTS", SUBJECT_ID=101, HADM_ID=150001, ITEMID=220045, CHARTTIME="not a time",
          VALUE="88", VALUENUM="88", VALUEUOM="bpm")
    w.add("NOTEEVENTS", SUBJECT_ID=101, HADM_ID=150001, CHARTDATE="2150-01-05 00:00:00",
          CATEGORY="Podiatry", DESCRIPTION="Report", TEXT="Unknown category.")

    w.write(out_dir)


def generate_demo(out_dir, rng):
    w = Writer()
    write_dictionaries(w, CHART_ITEMS, LAB_ITEMS)
    demo = [
        (946, 149258, "M", datetime(2040, 3, 16), datetime(2121, 5, 29, 14, 20), "Patient A"),
        (1204, 163117, "F", datetime(2051, 11, 2), datetime(2130, 8, 11, 7, 45), "Patient B"),
    ]
    common = {d: (routes, dose, unit, 1.0) for d, (routes, dose, unit, _) in DRUGS.items()
              if d in ("Heparin Sodium", "Metoprolol Tartrate", "Warfarin", "Magnesium Sulfate")}
    patients = []
    for i, (subject, hadm, gender, dob, admit, label) in enumerate(demo, 1):
        w.add("PATIENTS", SUBJECT_ID=subject, GENDER=gender, DOB=ts(dob), EXPIRE_FLAG=0)
        age = int((admit - dob).days / 365.25)
        add_admission(w, rng, subject, hadm, admit, admit + timedelta(days=2, hours=3), gender=gender, age=age,
                      drug_pool=common)
        patients.append({"id": f"p{i}", "label": label, "hadm_id": hadm})
    w.write(out_dir)
    (out_dir / "patients.json").write_text(json.dumps(patients, indent=2) + "\n")


def generate_small(path, rng):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADERS["PATIENTS"])
        for i in range(1, 21):
            dob = datetime(rng.randint(2020, 2120), rng.randint(1, 12), rng.randint(1, 28))
            w.writerow([i, 500 + i, rng.choice("MF"), ts(dob), "", "", "", 0])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    ap.add_argument("--seed", type=int, default=20240101)
    args = ap.parse_args()
    out = Path(args.out)
    generate_main(out, random.Random(args.seed))
    generate_demo(out / "demo", random.Random(args.seed + 1))
    generate_small(out / "patients_small.csv", random.Random(args.seed + 2))
    (out / "split_manifest.txt").write_text("".join(f"{200000 + i}\n" for i in range(1, 710)))


if __name__ == "__main__":
    main()
