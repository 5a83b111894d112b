#!/usr/bin/env python3
"""Regenerate the desk-scale fixtures under tests/fixtures/desk.

Everything is derived from a fixed seed, so rerunning produces identical files.
"""

import argparse
import json
import random
from datetime import datetime, timezone
from email.utils import format_datetime
from pathlib import Path

VOCAB = {
    "Arts": ["painting", "gallery", "sculpture", "theatre", "poetry", "cinema", "opera",
             "ballet", "artist", "pottery", "canvas", "studio", "jazz", "symphony",
             "film", "dance", "novel", "drama", "mural", "choir"],
    "Business": ["finance", "invest", "bank", "trade", "market", "capital", "insurance",
                 "logistics", "consult", "accounting", "payroll", "export", "venture", "equity",
                 "merchant", "ledger", "taxes", "brokerage", "leasing", "franchise"],
    "Computers": ["software", "linux", "python", "hardware", "server", "network", "database",
                  "program", "coding", "kernel", "computer", "firmware", "computing", "algorithm",
                  "internet", "cloud", "cyber", "byte", "pixel", "router"],
    "Games": ["chess", "poker", "puzzle", "arcade", "console", "gaming", "roleplay", "sudoku",
              "bingo", "cards", "tabletop", "dice", "quest", "dungeon", "esports", "trivia",
              "lottery", "crossword", "backgammon", "strategy"],
    "Health": ["medicine", "clinic", "nursing", "dental", "fitness", "nutrition", "therapy",
               "cancer", "diabetes", "cardio", "pharmacy", "wellness", "surgery", "vaccine",
               "pediatric", "hospital", "yoga", "vitamin", "allergy", "mental"],
    "Home": ["garden", "kitchen", "recipe", "cooking", "furniture", "decor", "plumbing",
             "cleaning", "parenting", "family", "baking", "lawn", "roofing", "interior",
             "laundry", "homeowner", "crafts", "pets", "quilting", "pantry"],
    "News": ["daily", "times", "herald", "tribune", "gazette", "journal", "headline", "press",
             "report", "weekly", "bulletin", "chronicle", "dispatch", "courier", "observer",
             "broadcast", "editorial", "magazine", "breaking", "newswire"],
    "Recreation": ["travel", "camping", "hiking", "fishing", "boating", "outdoors", "cycling",
                   "climbing", "hunting", "tourism", "aviation", "scuba", "kayak", "trails",
                   "resort", "cruise", "backpack", "birding", "motorcycle", "picnic"],
    "Reference": ["dictionary", "encyclopedia", "library", "archive", "atlas", "thesaurus",
                  "almanac", "glossary", "education", "school", "college", "academy",
                  "scholar", "quotations", "genealogy", "maps", "wiki", "lexicon",
                  "citation", "bibliography"],
    "Science": ["physics", "chemistry", "biology", "astronomy", "geology", "genetics",
                "ecology", "math", "quantum", "lab", "research", "botany", "zoology", "climate",
                "ocean", "neuro", "particle", "fossil", "telescope", "molecule"],
    "Shopping": ["shop", "store", "deals", "outlet", "boutique", "mall", "discount", "coupon",
                 "jewelry", "clothing", "shoes", "gifts", "toys", "fashion", "apparel",
                 "bargain", "cart", "catalog", "auction", "checkout"],
    "Society": ["religion", "church", "politics", "history", "culture", "law", "government",
                "charity", "ethnic", "philosophy", "people", "heritage", "rights",
                "community", "volunteer", "military", "civic", "faith", "activism", "union"],
    "Sports": ["football", "soccer", "baseball", "basketball", "hockey", "tennis", "golf",
               "rugby", "cricket", "boxing", "swimming", "running", "olympic", "league",
               "athletics", "skiing", "wrestling", "racing", "volleyball", "marathon"],
}

SUBCATEGORIES = {
    "Arts": [["Visual_Arts", "Painting"], ["Performing_Arts", "Theatre"], ["Music", "Jazz"]],
    "Business": [["Financial_Services", "Banking"], ["Trade", "Export"], ["Accounting"]],
    "Computers": [["Software", "Operating_Systems"], ["Hardware"], ["Programming", "Languages"]],
    "Games": [["Board_Games", "Chess"], ["Video_Games"], ["Puzzles", "Crosswords"]],
    "Health": [["Medicine", "Surgery"], ["Fitness"], ["Nutrition", "Vitamins"]],
    "Home": [["Gardening"], ["Cooking", "Baking"], ["Home_Improvement", "Plumbing"]],
    "News": [["Newspapers", "Daily"], ["Magazines"], ["Broadcast"]],
    "Recreation": [["Travel", "Cruises"], ["Outdoors", "Hiking"], ["Aviation"]],
    "Reference": [["Dictionaries"], ["Education", "Colleges"], ["Libraries", "Archives"]],
    "Science": [["Physics", "Quantum"], ["Biology", "Genetics"], ["Earth_Sciences"]],
    "Shopping": [["Clothing", "Shoes"], ["Gifts"], ["Jewelry"]],
    "Society": [["Religion_and_Spirituality"], ["Politics", "Activism"], ["History", "Military"]],
    "Sports": [["Soccer"], ["Basketball", "College"], ["Motorsports", "Racing"]],
}

TLDS = ["com", "com", "com", "org", "net", "edu", "co.uk", "com.au", "ca"]
ENTRIES_PER_TOP_LEVEL = 37

VIRGINIA = "Computers/Computer_Science/Academic_Departments/North_America/United_States/Virginia"
VIRGINIA_ENTRIES = [
    ("http://cs.gmu.edu/", "George Mason University - Department of Computer Science",
     "Programs, research and faculty of the computer science department."),
    ("http://cs.odu.edu/", "Old Dominion University - Computer Science",
     "Computer science department of Old Dominion University in Norfolk."),
    ("http://cs.virginia.edu/", "University of Virginia - Computer Science",
     "Department of computer science at the University of Virginia."),
    ("http://cs.vt.edu/", "Virginia Tech - Department of Computer Science",
     "Computer science department of Virginia Polytechnic Institute."),
    ("http://wm.edu/as/computerscience/?svr=web", "College of William and Mary - Computer Science",
     "Computer science department of the College of William and Mary."),
    ("http://radford.edu/content/csat/home/itec.html", "Radford University - Information Technology",
     "Department of information technology at Radford University."),
    ("http://cs.jmu.edu/", "James Madison University - Computer Science",
     "Computer science department of James Madison University."),
    ("https://php.radford.edu/~itec", "Radford University - ITEC",
     "Information technology department pages at Radford University."),
    ("http://mathcs.richmond.edu/", "University of Richmond - Mathematics and Computer Science",
     "Mathematics and computer science department of the University of Richmond."),
    ("http://hollins.edu/academics/computersci", "Hollins University - Computer Science",
     "Computer science program at Hollins University."),
]
OTHER_STATES = {
    "North_Carolina": [
        ("http://cs.unc.edu/", "UNC Chapel Hill - Computer Science"),
        ("http://csc.ncsu.edu/", "NC State - Computer Science"),
        ("http://cs.duke.edu/", "Duke University - Computer Science"),
        ("http://cs.appstate.edu/", "Appalachian State - Computer Science"),
    ],
    "Maryland": [
        ("http://cs.umd.edu/", "University of Maryland - Computer Science"),
        ("http://cs.jhu.edu/", "Johns Hopkins - Computer Science"),
        ("http://csee.umbc.edu/", "UMBC - Computer Science and Electrical Engineering"),
        ("http://towson.edu/cosc/", "Towson University - Computer and Information Sciences"),
    ],
}


def make_ontology(rng):
    rows = []
    seen = set()
    for top, words in VOCAB.items():
        subs = SUBCATEGORIES[top]
        for i in range(ENTRIES_PER_TOP_LEVEL):
            sub = subs[i % len(subs)]
            depth = 1 + (i // len(subs)) % len(sub)
            category = "/".join([top] + sub[:depth])
            while True:
                a, b = rng.sample(words, 2)
                host = a + (b if rng.random() < 0.5 else "")
                if rng.random() < 0.15:
                    host += str(rng.randint(1, 99))
                if rng.random() < 0.2:
                    host = host[: len(a)] + "-" + b
                tld = rng.choice(TLDS)
                path = ""
                r = rng.random()
                if r < 0.35:
                    path = "/" + rng.choice(words)
                elif r < 0.5:
                    path = "/" + rng.choice(words) + "/" + rng.choice(words) + ".html"
                uri = f"http://www.{host}.{tld}{path}" if rng.random() < 0.3 else f"http://{host}.{tld}{path}"
                if uri not in seen:
                    seen.add(uri)
                    break
            title = " ".join(w.capitalize() for w in rng.sample(words, 3))
            desc = "Resources about " + ", ".join(rng.sample(words, 3)) + "."
            rows.append((category, uri, title, desc))
    for uri, title, desc in VIRGINIA_ENTRIES:
        rows.append((VIRGINIA, uri, title, desc))
    for state, entries in OTHER_STATES.items():
        cat = VIRGINIA.rsplit("/", 1)[0] + "/" + state
        for uri, title in entries:
            rows.append((cat, uri, title, title.split(" - ")[0] + " computer science department."))
    return rows


def http_date(ts):
    dt = datetime.strptime(ts, "%Y%m%d%H%M%S").replace(tzinfo=timezone.utc)
    return format_datetime(dt, usegmt=True)


def link_timemap(original, stamps, self_url, next_url=None):
    lines = [f'<{original}>; rel="original",',
             f'<{self_url}>; rel="self"; type="application/link-format"']
    if next_url:
        lines[-1] += ","
        lines.append(f'<{next_url}>; rel="next"; type="application/link-format"')
    for i, (ts, archive_uri) in enumerate(stamps):
        lines[-1] += ","
        rel = "memento"
        if i == 0:
            rel = "first memento"
        elif i == len(stamps) - 1 and not next_url:
            rel = "last memento"
        lines.append(f'<{archive_uri}>; rel="{rel}"; datetime="{http_date(ts)}"')
    return "\n".join(lines) + "\n"


def wayback(ts, uri):
    return f"https://web.archive.org/web/{ts}/{uri}"


def archive_today(ts, uri):
    return f"https://archive.today/{ts}/{uri}"


AGG = "http://memgator.example/timemap/link/"

TIMEMAPS = {
    "http://cs.gmu.edu/": ["20120115101010", "20131120080000", "20140305120000", "20150601000000"],
    "http://cs.virginia.edu/": ["20100101000000", "20140208043915", "20160707070707"],
    "http://cs.vt.edu/": ["20090909090909", "20121212121212", "20170101000000"],
    "http://wm.edu/as/computerscience/?svr=web": ["20130401000000", "20140601000000"],
    "http://radford.edu/content/csat/home/itec.html": ["20110301000000"],
    "http://cs.jmu.edu/": ["20140223213510", "20140310000000", "20150220000000"],
    "http://mathcs.richmond.edu/": ["20081010000000", "20131001000000"],
}
ODU_PAGE1 = ["20050505050505", "20080808080808", "20120101000000"]
ODU_PAGE2 = ["20140226090846", "20140412000000", "20180101000000"]


def write_timemaps(out):
    tdir = out / "timemaps"
    tdir.mkdir(parents=True, exist_ok=True)
    index = ["# key\tfile (URI keys match by SURT, page URLs exactly)"]
    for n, (uri, stamps) in enumerate(TIMEMAPS.items()):
        name = f"tm{n:02d}.link"
        mementos = [(ts, wayback(ts, uri) if i % 2 == 0 else archive_today(ts, uri))
                    for i, ts in enumerate(stamps)]
        (tdir / name).write_text(link_timemap(uri, mementos, AGG + uri))
        index.append(f"{uri}\t{name}")
    odu = "http://cs.odu.edu/"
    page2_url = "http://memgator.example/timemap/link/2/http://cs.odu.edu/"
    p1 = [(ts, wayback(ts, odu)) for ts in ODU_PAGE1]
    p2 = [(ts, wayback(ts, "http://cs.odu.edu:80/")) for ts in ODU_PAGE2]
    # The second page repeats one memento of the first; it must be counted once.
    p2.append(p1[-1])
    (tdir / "odu_p1.link").write_text(link_timemap(odu, p1, AGG + odu, next_url=page2_url))
    (tdir / "odu_p2.link").write_text(link_timemap(odu, p2, page2_url))
    index.append(f"{odu}\todu_p1.link")
    index.append(f"{page2_url}\todu_p2.link")
    # Unarchived: an aggregator 404 and a TimeMap without mementos.
    index.append("https://php.radford.edu/~itec\t!404")
    (tdir / "hollins.link").write_text(
        link_timemap("http://hollins.edu/academics/computersci", [],
                     AGG + "http://hollins.edu/academics/computersci"))
    index.append("http://hollins.edu/academics/computersci\thollins.link")
    # Transport failure, for the retry/failed-candidate paths.
    index.append("http://flaky.example.com/\t!error")
    (tdir / "index.tsv").write_text("\n".join(index) + "\n")


POPULARITY = [("gmu.edu", 4211), ("odu.edu", 9876), ("virginia.edu", 2954), ("vt.edu", 3520),
              ("wm.edu", 14032), ("radford.edu", 41220), ("jmu.edu", 12870),
              ("richmond.edu", 25410), ("hollins.edu", 310455)]

DAMAGE = [(wayback("20140226090846", "http://cs.odu.edu:80/"), 0.13),
          (archive_today("20140208043915", "http://cs.virginia.edu/"), 0.21),
          (wayback("20140223213510", "http://cs.jmu.edu/"), 0.08),
          (wayback("20140305120000", "http://cs.gmu.edu/"), 0.35),
          (archive_today("20121212121212", "http://cs.vt.edu/"), 0.4),
          (archive_today("20131001000000", "http://mathcs.richmond.edu/"), 0.0)]

SECONDARY = [
    {"official_uri": "http://odu.edu/", "page": "https://en.wikipedia.org/wiki/Old_Dominion_University",
     "categories": ["Universities and colleges in Virginia", "Old Dominion University"],
     "members": ["http://gmu.edu/", "http://vt.edu/", "http://virginia.edu/", "http://jmu.edu/", "http://odu.edu/"]},
    {"official_uri": "http://gmu.edu/", "page": "https://en.wikipedia.org/wiki/George_Mason_University",
     "categories": ["Universities and colleges in Virginia"],
     "members": ["http://odu.edu/", "http://vt.edu/", "http://virginia.edu/", "http://jmu.edu/", "http://gmu.edu/"]},
]

# (line, survives) pairs; each dropped line names the rule it exercises.
ACCESS_LOG = [
    ('203.0.113.5 [01/Mar/2014:10:00:00 +0000] GET http://example.com/ HTTP/1.1 200 5120 "-" "Mozilla/5.0"', True),
    ('203.0.113.6 [01/Mar/2014:10:00:01 +0000] GET http://example.com/missing HTTP/1.1 404 230 "-" "Mozilla/5.0"', False),
    ('203.0.113.7 [01/Mar/2014:10:00:02 +0000] GET http://63.135.118.69/page HTTP/1.1 200 999 "-" "Mozilla/5.0"', False),
    ('203.0.113.8 [01/Mar/2014:10:00:03 +0000] GET http://example.com/logo.png HTTP/1.1 200 4410 "-" "Mozilla/5.0"', False),
    ('203.0.113.9 [01/Mar/2014:10:00:04 +0000] GET http://beispiel.de/seite HTTP/1.1 200 1200 "-" "Mozilla/5.0"', False),
    ('203.0.113.5 [01/Mar/2014:10:00:05 +0000] GET http://example.com/ HTTP/1.1 200 5120 "-" "Mozilla/5.0"', False),
    ('198.51.100.1 [01/Mar/2014:10:01:00 +0000] GET http://cs.odu.edu/~mln/ HTTP/1.1 200 8000 "http://cs.odu.edu/" "Mozilla/5.0"', True),
    ('198.51.100.2 [01/Mar/2014:10:01:05 +0000] GET /web/20140301000000/http://bbc.co.uk/news HTTP/1.1 200 65000 "-" "Mozilla/5.0"', True),
    ('198.51.100.3 [01/Mar/2014:10:01:10 +0000] GET http://www.abc.net.au/index.html HTTP/1.1 200 3000 "-" "Mozilla/5.0"', True),
    ('198.51.100.4 [01/Mar/2014:10:01:15 +0000] GET http://example.org/report.pdf HTTP/1.1 200 90000 "-" "Mozilla/5.0"', False),
    ('198.51.100.5 [01/Mar/2014:10:01:20 +0000] GET http://exemple.fr/ HTTP/1.1 200 1100 "-" "Mozilla/5.0"', False),
    ('198.51.100.6 [01/Mar/2014:10:01:25 +0000] GET http://news.example.net/story.php?id=7 HTTP/1.1 200 7000 "-" "Mozilla/5.0"', True),
    ('198.51.100.7 [01/Mar/2014:10:01:30 +0000] GET http://example.com/old HTTP/1.1 301 0 "-" "Mozilla/5.0"', False),
    ('198.51.100.8 [01/Mar/2014:10:01:35 +0000] GET mailto:someone@example.com HTTP/1.1 200 10 "-" "Mozilla/5.0"', False),
    ('198.51.100.9 [01/Mar/2014:10:01:40 +0000] GET http://gc.ca/home.aspx HTTP/1.1 200 4000 "-" "Mozilla/5.0"', True),
    ('198.51.100.10 [01/Mar/2014:10:01:45 +0000] GET http://10.0.0.1/index.html HTTP/1.1 200 500 "-" "Mozilla/5.0"', False),
    ('198.51.100.11 [01/Mar/2014:10:01:50 +0000] GET http://cs.odu.edu/~mln/ HTTP/1.1 200 8000 "-" "curl/7.35"', False),
    ('198.51.100.12 [01/Mar/2014:10:01:55 +0000] GET http://example.com/style.css HTTP/1.1 200 800 "-" "Mozilla/5.0"', False),
    ('198.51.100.13 [01/Mar/2014:10:02:00 +0000] GET http://odu.edu/compsci HTTP/1.1 500 0 "-" "Mozilla/5.0"', False),
    ('198.51.100.14 [01/Mar/2014:10:02:05 +0000] GET http://museum.example.org/exhibit/cgi-bin/view.cgi HTTP/1.1 200 2500 "-" "Mozilla/5.0"', True),
]
SURVIVORS = ["http://example.com/", "http://cs.odu.edu/~mln/", "http://bbc.co.uk/news",
             "http://www.abc.net.au/index.html", "http://news.example.net/story.php?id=7",
             "http://gc.ca/home.aspx", "http://museum.example.org/exhibit/cgi-bin/view.cgi"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests/fixtures/desk")
    ap.add_argument("--seed", type=int, default=20140301)
    args = ap.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    rows = make_ontology(random.Random(args.seed))
    with open(out / "ontology.tsv", "w") as f:
        f.write("# category\turi\ttitle\tdescription\n")
        for row in rows:
            f.write("\t".join(row) + "\n")

    write_timemaps(out)
    (out / "popularity.tsv").write_text("# domain\trank\n" + "".join(f"{d}\t{r}\n" for d, r in POPULARITY))
    (out / "damage.tsv").write_text("# memento\tdamage\n" + "".join(f"{m}\t{d}\n" for m, d in DAMAGE))
    (out / "wikipedia.jsonl").write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in SECONDARY))
    assert len(ACCESS_LOG) == 20
    (out / "access_log.txt").write_text("".join(line + "\n" for line, _ in ACCESS_LOG))
    (out / "access_log_survivors.txt").write_text("".join(u + "\n" for u in SURVIVORS))
    print(f"{len(rows)} ontology entries -> {out}")


if __name__ == "__main__":
    main()
