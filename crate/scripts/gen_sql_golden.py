"""Freeze expected result tables for the SQL golden suite.

Runs each query against the bundled Movies CSV in SQLite and writes the
column names and rows as JSON. Every query whose row order would otherwise
be unspecified carries an ORDER BY with a unique key.

    python3 scripts/gen_sql_golden.py
"""

import csv
import json
import pathlib
import sqlite3

ROOT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core"
CSV = ROOT / "assets" / "datasets" / "movies.csv"
OUT = ROOT / "tests" / "golden" / "movies_sql.json"

QUERIES = [
    # projections
    'SELECT "Movie", "Year" FROM "Movies"',
    'SELECT * FROM "Movies" LIMIT 7',
    'SELECT "Movie" AS title, "Worldwide $m" AS ww FROM "Movies" ORDER BY ww DESC, title LIMIT 10',
    'SELECT DISTINCT "Studio" FROM "Movies" ORDER BY "Studio"',
    'SELECT DISTINCT "Type", "Studio" FROM "Movies" ORDER BY "Type", "Studio"',
    'SELECT "Movie", "Domestic $m" + "Overseas $m" AS total FROM "Movies" ORDER BY "Movie" LIMIT 12',
    'SELECT "Movie", "Worldwide $m" - "Domestic $m" FROM "Movies" ORDER BY "Movie" LIMIT 5',
    'SELECT "Movie", "Year" * 2 FROM "Movies" ORDER BY "Movie" LIMIT 5',
    'SELECT "Movie", "Worldwide $m" / 2 FROM "Movies" ORDER BY "Movie" LIMIT 5',
    'SELECT "Movie", -"Year" FROM "Movies" ORDER BY "Movie" DESC LIMIT 4',
    # all five aggregates, ungrouped
    'SELECT COUNT(*) FROM "Movies"',
    'SELECT SUM("Worldwide $m") FROM "Movies"',
    'SELECT AVG("Domestic $m") FROM "Movies"',
    'SELECT MIN("Year"), MAX("Year") FROM "Movies"',
    'SELECT COUNT(DISTINCT "Type"), COUNT("Movie") FROM "Movies"',
    'SELECT SUM("Year"), AVG("Year") FROM "Movies"',
    'SELECT MIN("Movie"), MAX("Movie") FROM "Movies"',
    'SELECT COUNT(*) FROM "Movies" WHERE "Year" > 3000',
    'SELECT SUM("Overseas $m") FROM "Movies" WHERE "Studio" = \'Nobody\'',
    # WHERE operators
    'SELECT "Movie" FROM "Movies" WHERE "Studio" = \'Fox\' ORDER BY "Movie"',
    'SELECT "Movie" FROM "Movies" WHERE "Studio" != \'Fox\' AND "Year" = 2001 ORDER BY "Movie"',
    'SELECT "Movie" FROM "Movies" WHERE "Worldwide $m" > 800 ORDER BY "Movie"',
    'SELECT "Movie" FROM "Movies" WHERE "Worldwide $m" <= 60 ORDER BY "Movie"',
    'SELECT "Movie", "Year" FROM "Movies" WHERE "Year" >= 2013 AND "Type" = \'Comedy\' ORDER BY "Movie"',
    'SELECT "Movie" FROM "Movies" WHERE "Year" < 1997 OR "Year" > 2014 ORDER BY "Movie"',
    'SELECT "Movie" FROM "Movies" WHERE "Type" IN (\'Horror\', \'Animation\') AND "Year" = 2010 ORDER BY "Movie"',
    'SELECT COUNT(*) FROM "Movies" WHERE "Studio" NOT IN (\'Fox\', \'Disney\', \'Sony\')',
    'SELECT "Movie" FROM "Movies" WHERE "Year" BETWEEN 2003 AND 2004 ORDER BY "Movie"',
    'SELECT COUNT(*) FROM "Movies" WHERE "Domestic $m" NOT BETWEEN 100 AND 400',
    'SELECT "Movie" FROM "Movies" WHERE "Movie" LIKE \'The S%\' ORDER BY "Movie"',
    'SELECT COUNT(*) FROM "Movies" WHERE "Movie" LIKE \'%e_\'',
    'SELECT COUNT(*) FROM "Movies" WHERE NOT ("Type" = \'Drama\' OR "Studio" = \'Fox\')',
    'SELECT "Movie" FROM "Movies" WHERE ("Year" - 2000) * 10 > "Domestic $m" ORDER BY "Movie"',
    # GROUP BY and HAVING
    'SELECT "Studio", COUNT(*) FROM "Movies" GROUP BY "Studio" ORDER BY "Studio"',
    'SELECT "Type", SUM("Worldwide $m") AS total FROM "Movies" GROUP BY "Type" ORDER BY total DESC',
    'SELECT "Year", AVG("Domestic $m") FROM "Movies" GROUP BY "Year" ORDER BY "Year"',
    'SELECT "Studio", MIN("Year"), MAX("Year") FROM "Movies" GROUP BY "Studio" ORDER BY "Studio"',
    'SELECT "Studio", "Type", COUNT(*) AS n FROM "Movies" GROUP BY "Studio", "Type" ORDER BY "Studio", "Type"',
    'SELECT "Type", COUNT(*) AS n FROM "Movies" GROUP BY "Type" HAVING COUNT(*) > 28 ORDER BY "Type"',
    'SELECT "Studio", SUM("Overseas $m") FROM "Movies" GROUP BY "Studio" HAVING SUM("Overseas $m") > 8000 ORDER BY "Studio"',
    'SELECT "Year", COUNT(*) FROM "Movies" WHERE "Type" = \'Action\' GROUP BY "Year" ORDER BY "Year"',
    'SELECT "Type", MAX("Worldwide $m") - MIN("Worldwide $m") AS spread FROM "Movies" GROUP BY "Type" ORDER BY "Type"',
    'SELECT "Studio", AVG("Worldwide $m") AS a FROM "Movies" WHERE "Year" >= 2000 GROUP BY "Studio" HAVING AVG("Worldwide $m") > 400 ORDER BY a DESC',
    'SELECT "Studio", COUNT(DISTINCT "Type") FROM "Movies" GROUP BY "Studio" ORDER BY "Studio"',
    # ORDER BY and LIMIT
    'SELECT "Movie", "Worldwide $m" FROM "Movies" WHERE "Type" = \'Drama\' AND "Year" >= 2000 ORDER BY "Worldwide $m" DESC LIMIT 5',
    'SELECT "Movie", "Year" FROM "Movies" ORDER BY "Year" DESC, "Movie" ASC LIMIT 8',
    'SELECT "Movie" FROM "Movies" ORDER BY "Movie" LIMIT 5 OFFSET 10',
    'SELECT "Type", SUM("Domestic $m") FROM "Movies" GROUP BY "Type" ORDER BY 2 DESC LIMIT 3',
    'SELECT "Studio", COUNT(*) AS n FROM "Movies" GROUP BY "Studio" ORDER BY n DESC, "Studio" LIMIT 4',
    'SELECT "Movie", "Overseas $m" FROM "Movies" ORDER BY "Overseas $m" ASC, "Movie" LIMIT 0',
]


def main():
    assert len(QUERIES) == 50, len(QUERIES)
    con = sqlite3.connect(":memory:")
    con.execute("PRAGMA case_sensitive_like = ON")
    con.execute(
        'CREATE TABLE "Movies" ("Movie" TEXT, "Studio" TEXT, "Type" TEXT, '
        '"Worldwide $m" REAL, "Domestic $m" REAL, "Overseas $m" REAL, "Year" INTEGER)'
    )
    with open(CSV, newline="") as f:
        rows = list(csv.DictReader(f))
    con.executemany(
        'INSERT INTO "Movies" VALUES (?, ?, ?, ?, ?, ?, ?)',
        [
            (
                r["Movie"],
                r["Studio"],
                r["Type"],
                float(r["Worldwide $m"]),
                float(r["Domestic $m"]),
                float(r["Overseas $m"]),
                int(r["Year"]),
            )
            for r in rows
        ],
    )
    cases = []
    for sql in QUERIES:
        cur = con.execute(sql)
        cases.append(
            {
                "sql": sql,
                "columns": [d[0] for d in cur.description],
                "rows": [list(r) for r in cur.fetchall()],
            }
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(cases, indent=1) + "\n")
    print(f"{len(cases)} cases written to {OUT}")


if __name__ == "__main__":
    main()
