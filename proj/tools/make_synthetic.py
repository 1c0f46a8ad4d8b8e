#!/usr/bin/env python3
"""Regenerates data/synthetic: a small annotated sample, two unlabeled
target corpora, an SSA-style name file and ethnicity training names.

Conversational labels are driven by keyword groups so models can learn
them; demographic labels are only weakly tied to the text.  Output is
deterministic for a given --seed.
"""

import argparse
import json
import random
from pathlib import Path

STANCE = {
    "Against": ["handout", "unaffordable", "taxpayers foot the bill", "nothing is free", "waste of money"],
    "For": ["invest in students", "opportunity for all", "education is a right", "long overdue", "level the field"],
    "Uncommitted": ["not sure yet", "could go either way"],
}
FRAMING = {
    "Neoliberalism": ["free market", "personal responsibility", "lower taxes", "private sector", "competition"],
    "Social Good": ["public good", "our communities", "shared prosperity", "helping families", "common welfare"],
    "Unknown": ["whatever happens"],
}
TOPIC = {
    "On-Topic": ["tuition", "college", "student loans", "university costs", "campus"],
    "Not On-Topic": ["the election", "gas prices", "border wall", "the weather", "football season"],
}
CIVILITY = {
    "Civil": ["respectfully", "i think", "thank you", "good point", "in my view"],
    "Uncivil": ["idiots", "morons", "shut up", "pathetic", "clowns"],
}
SOURCE_WORDS = {
    "CNN": ["anderson", "breaking"],
    "FOX": ["hannity", "tucker"],
    "MSN": ["msn", "nbc"],
    "White House": ["mr president", "administration"],
}
FILLER = ["the", "this", "plan", "people", "will", "really", "just", "about", "we", "need", "so", "it", "is", "all"]

GIVEN = {
    "Female": ["Mary", "Linda", "Susan", "Karen", "Emily", "Sofia", "Aiko", "Priya", "Fatima", "Olga", "Ingrid", "Chloe"],
    "Male": ["James", "Robert", "Michael", "David", "Carlos", "Hiroshi", "Rahul", "Omar", "Ivan", "Lars", "Pierre", "Kwame"],
    "Unknown": ["Taylor", "Jordan", "Casey", "Riley"],
}
SURNAMES = {
    "Asian-GreaterEastAsian-EastAsian": ["Wang", "Chen", "Zhang", "Liu", "Huang"],
    "Asian-GreaterEastAsian-Japanese": ["Tanaka", "Sato", "Suzuki", "Takahashi", "Watanabe"],
    "Asian-IndianSubContinent": ["Patel", "Sharma", "Gupta", "Reddy", "Iyer"],
    "GreaterAfrican-Africans": ["Okafor", "Mensah", "Adeyemi", "Boateng", "Nwosu"],
    "GreaterAfrican-Muslim": ["Rahman", "Hussein", "Abdullah", "Haddad", "Mahmoud"],
    "GreaterEuropean-British": ["Smith", "Johnson", "Brown", "Taylor", "Wright", "Walker", "Thompson", "Clarke"],
    "GreaterEuropean-EastEuropean": ["Kowalski", "Novak", "Petrov", "Ivanova", "Horvat"],
    "GreaterEuropean-Jewish": ["Cohen", "Levy", "Goldberg", "Friedman", "Katz"],
    "GreaterEuropean-WestEuropean-French": ["Dubois", "Lefebvre", "Moreau", "Laurent", "Girard"],
    "GreaterEuropean-WestEuropean-Germanic": ["Schmidt", "Muller", "Schneider", "Fischer", "Weber"],
    "GreaterEuropean-WestEuropean-Hispanic": ["Gomez", "Hernandez", "Lopez", "Martinez", "Rodriguez"],
    "GreaterEuropean-WestEuropean-Italian": ["Rossi", "Russo", "Bianchi", "Romano", "Colombo"],
    "GreaterEuropean-WestEuropean-Nordic": ["Andersen", "Johansson", "Nilsson", "Larsen", "Lindqvist"],
}
# Reporting population: mostly British surnames, like the case study.
SURNAME_WEIGHTS = {k: (8 if k.endswith("British") else 1) for k in SURNAMES}

SCHEMA_VALUES = {
    "Age Category": ["29 and Under", "30-49", "50 and Over", "Unknown"],
    "Military Family": ["Military Family", "Not Military Family", "Undetermined"],
    "Political Leaning": ["Conservative Leaning", "Liberal Leaning", "Undetermined"],
    "Race": ["Asian", "Black", "International", "Latino (a)", "Middle Eastern", "Unknown", "White"],
}
RACE_BY_ETHNICITY = {
    "Asian": "Asian",
    "GreaterAfrican-Africans": "Black",
    "GreaterAfrican-Muslim": "Middle Eastern",
    "Hispanic": "Latino (a)",
}


def weighted(rng, table):
    keys = list(table)
    return rng.choices(keys, weights=[table[k] for k in keys])[0]


def make_author(rng):
    gender = rng.choices(["Female", "Male", "Unknown"], weights=[45, 48, 7])[0]
    eth = weighted(rng, SURNAME_WEIGHTS)
    return gender, eth, f"{rng.choice(GIVEN[gender])} {rng.choice(SURNAMES[eth])}"


def race_for(rng, eth):
    for key, race in RACE_BY_ETHNICITY.items():
        if key in eth:
            return race if rng.random() < 0.8 else "White"
    return rng.choices(["White", "International", "Unknown"], weights=[90, 5, 5])[0]


def make_record(rng, rid, annotated):
    gender, eth, name = make_author(rng)
    source = rng.choice(list(SOURCE_WORDS))
    # Men lean Against and uncivil, mirroring the direction of the case study.
    stance = rng.choices(["Against", "For", "Uncommitted"],
                         weights=[78, 21, 1] if gender == "Male" else [68, 31, 1])[0]
    framing = "Neoliberalism" if stance == "Against" else "Social Good"
    if rng.random() < 0.1:
        framing = rng.choice(["Neoliberalism", "Social Good"])
    if rng.random() < 0.03:
        framing = "Unknown"
    topic = rng.choices(["On-Topic", "Not On-Topic"], weights=[62, 38])[0]
    civil = rng.choices(["Civil", "Uncivil"], weights=[40, 60] if gender == "Male" else [52, 48])[0]

    parts = [rng.choice(STANCE[stance]), rng.choice(FRAMING[framing]), rng.choice(TOPIC[topic]),
             rng.choice(CIVILITY[civil])]
    if rng.random() < 0.5:
        parts.append(rng.choice(SOURCE_WORDS[source]))
    parts += rng.sample(FILLER, 4)
    rng.shuffle(parts)
    text = " ".join(parts).capitalize() + rng.choice([".", "!", "?"])

    rec = {
        "id": rid,
        "text": text,
        "source": source,
        "created_at": f"2019-0{rng.randint(1, 9)}-{rng.randint(10, 28)}T{rng.randint(10, 23)}:00:00Z",
        "author_name": name,
        "likes": rng.randint(0, 500),
    }
    if annotated:
        rec["gold_labels"] = {
            "Against/For": stance,
            "Age Category": rng.choices(SCHEMA_VALUES["Age Category"], weights=[10, 33, 40, 17])[0],
            "Civil/Uncivil": civil,
            "Gender": gender if gender != "Unknown" and rng.random() < 0.9 else rng.choice(["Female", "Male"]),
            "Military Family": rng.choices(SCHEMA_VALUES["Military Family"], weights=[20, 78, 2])[0],
            "Neoliberalism/Social Good": framing,
            "OnTopic/Not-OnTopic": topic,
            "Political Leaning": ("Conservative Leaning" if stance == "Against" else "Liberal Leaning")
            if rng.random() < 0.6 else rng.choice(SCHEMA_VALUES["Political Leaning"]),
            "Race": race_for(rng, eth),
        }
    return rec


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--sampled", type=int, default=300)
    ap.add_argument("--full", type=int, default=1200)
    ap.add_argument("--new", type=int, default=500)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    write_jsonl(out / "sampled.jsonl", [make_record(rng, f"s{i:04d}", True) for i in range(args.sampled)])
    write_jsonl(out / "full.jsonl", [make_record(rng, f"f{i:05d}", False) for i in range(args.full)])
    write_jsonl(out / "new.jsonl", [make_record(rng, f"n{i:05d}", False) for i in range(args.new)])

    # SSA-style name,sex,count,year lines; several years per name.
    lines = []
    for year in (1970, 1985, 2000):
        for n in GIVEN["Female"]:
            lines.append(f"{n},F,{rng.randint(2000, 9000)},{year}")
            lines.append(f"{n},M,{rng.randint(0, 20)},{year}")
        for n in GIVEN["Male"]:
            lines.append(f"{n},M,{rng.randint(2000, 9000)},{year}")
            lines.append(f"{n},F,{rng.randint(0, 20)},{year}")
        for n in GIVEN["Unknown"]:
            lines.append(f"{n},F,{rng.randint(3000, 5000)},{year}")
            lines.append(f"{n},M,{rng.randint(3000, 5000)},{year}")
    (out / "names.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rows = ["name,ethnicity"]
    for leaf, surnames in SURNAMES.items():
        for s in surnames:
            for g in rng.sample(GIVEN["Female"] + GIVEN["Male"], 4):
                rows.append(f"{g} {s},{leaf}")
    (out / "ethnicity_training.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    config = {
        "paths": {
            "raw": "full.jsonl",
            "sampled": "sampled.jsonl",
            "full": "full.jsonl",
            "new": "new.jsonl",
            "name_db": "names.csv",
            "ethnicity_training": "ethnicity_training.csv"
        },
        "seed": 42,
        "sampling": {"mode": "top-k", "k": 50, "group": "Source"},
        "cv": {"k": 5, "grid": [0.01, 0.1, 1, 10]},
        "enrichment": {"provider": "local"},
    }
    (out / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
