#!/usr/bin/env python3
"""Regenerate the miniature WordNet-format database used by the tests.

Writes index.noun, index.adj, data.noun, data.adj, noun.exc and adj.exc into
./wordnet next to this script. Synset offsets are real byte offsets into the
data files, as in the distributed database.
"""
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "wordnet")

# Each synset: list of member lemmas. A lemma may appear in several synsets.
NOUN_SYNSETS = [
    ["ticket"], ["suite"], ["chatbot"], ["support"], ["service"],
    ["customer", "client"], ["agent"], ["data"], ["datum"], ["machine"],
    ["model"], ["text"], ["speech"], ["content"], ["grammar"], ["spelling"],
    ["plagiarism"], ["checker"], ["accounting"], ["invoice"], ["payroll"],
    ["tax"], ["security"], ["threat"], ["protection"], ["privacy"],
    ["problem", "issue"], ["issue"], ["error", "mistake"], ["bug"],
    ["feature"], ["tool"], ["app", "application"], ["application"],
    ["software"], ["platform"], ["interface"], ["user"], ["team"],
    ["company"], ["business"], ["price"], ["cost"], ["plan"],
    ["subscription"], ["account"], ["report"], ["dashboard"], ["analysis"],
    ["analytics"], ["visualization"], ["chart"], ["graph"], ["insight"],
    ["quality"], ["accuracy"], ["clarity"], ["integration"], ["workflow"],
    ["automation"], ["response"], ["answer"], ["question"], ["conversation"],
    ["message"], ["email"], ["writer"], ["writing"], ["sentence"], ["word"],
    ["essay"], ["document"], ["file"], ["image"], ["video"], ["voice"],
    ["transcription"], ["translation"], ["language"], ["network"],
    ["firewall"], ["cloud"], ["server"], ["alert"], ["camera"],
    ["surveillance"], ["monitoring"], ["python"], ["code"], ["library"],
    ["package"], ["environment"], ["memory"], ["drift"], ["marketing"],
    ["campaign"], ["engagement"], ["ethics"], ["bias"], ["decision"],
    ["signal"], ["simulation"], ["power"], ["precision"], ["time"],
    ["day"], ["week"], ["month"], ["year"], ["hour"], ["minute"],
    ["experience"], ["learning"], ["curve"], ["setup"], ["update"],
    ["version"], ["login"], ["password"], ["box"], ["fox"], ["buzz"],
    ["match"], ["church"], ["dish"], ["brush"], ["glass"], ["class"],
    ["bus"], ["boss"], ["city"], ["company"], ["policy"], ["strategy"],
    ["category"], ["query"], ["library"], ["country"], ["industry"],
    ["story"], ["copy"], ["body"], ["entry"], ["delivery"],
    ["man"], ["woman"], ["chairman"], ["salesman"], ["child"], ["mouse"],
    ["goose"], ["foot"], ["tooth"], ["person"], ["corpus"], ["criterion"],
    ["phenomenon"], ["thesis"], ["crisis"], ["hypothesis"], ["index"],
    ["matrix"], ["vertex"], ["medium"], ["curriculum"], ["ox"], ["louse"],
    ["leaf"], ["knife"], ["wife"], ["life"], ["half"], ["wolf"], ["shelf"],
    ["calf"], ["thief"], ["loaf"], ["cactus"], ["fungus"], ["nucleus"],
    ["radius"], ["stimulus"], ["syllabus"], ["alumnus"], ["appendix"],
    ["basis"], ["axis"], ["diagnosis"], ["synopsis"], ["parenthesis"],
    ["good"], ["light"], ["project"], ["task"], ["result"], ["performance"],
    ["speed"], ["cat"], ["dog"], ["house"], ["car"], ["key"], ["way"],
    ["boy"], ["toy"], ["day"], ["lady"], ["baby"], ["story"], ["party"],
    ["help"], ["desk"], ["lead"], ["sale"], ["deal"], ["free"],
]

ADJ_SYNSETS = [
    # (lemmas, antonym synset index or None) -- antonyms filled below
    ["good"], ["bad"], ["great"], ["fast", "quick"], ["slow"], ["easy"],
    ["difficult", "hard"], ["hard"], ["happy"], ["unhappy"], ["simple"],
    ["complex"], ["accurate"], ["inaccurate"], ["useful"], ["useless"],
    ["big", "large"], ["small", "little"], ["cheap"], ["expensive"],
    ["helpful"], ["statistical"], ["mathematical"], ["hybrid"],
    ["predictive"], ["ethical"], ["professional"], ["intuitive"],
    ["reliable"], ["unreliable"], ["new"], ["old"], ["nice"], ["fine"],
    ["free"], ["late"], ["early"], ["able"], ["wide"], ["pure"],
    ["sure"], ["strange"], ["close"], ["safe"], ["wise"], ["brave"],
    ["tall"], ["short"], ["long"], ["high"], ["low"], ["hot"], ["cold"],
    ["thin"], ["fat"], ["wet"], ["sad"], ["red"], ["busy"], ["heavy"],
    ["pretty"], ["funny"], ["dry"], ["shy"], ["light"], ["clean"],
    ["dirty"], ["smart"], ["clear"], ["powerful"], ["far"], ["well"],
]

ADJ_ANTONYMS = [
    ("good", "bad"), ("fast", "slow"), ("easy", "difficult"),
    ("happy", "unhappy"), ("simple", "complex"), ("accurate", "inaccurate"),
    ("useful", "useless"), ("big", "small"), ("cheap", "expensive"),
    ("reliable", "unreliable"), ("new", "old"), ("early", "late"),
    ("high", "low"), ("hot", "cold"), ("clean", "dirty"),
]
NOUN_ANTONYMS = [("question", "answer")]

NOUN_EXC = [
    ("corpora", "corpus"), ("mice", "mouse"), ("children", "child"),
    ("geese", "goose"), ("feet", "foot"), ("teeth", "tooth"),
    ("people", "person"), ("criteria", "criterion"),
    ("phenomena", "phenomenon"), ("theses", "thesis"), ("crises", "crisis"),
    ("hypotheses", "hypothesis"), ("indices", "index"), ("matrices", "matrix"),
    ("vertices", "vertex"), ("media", "medium"), ("curricula", "curriculum"),
    ("oxen", "ox"), ("lice", "louse"), ("leaves", "leaf"), ("knives", "knife"),
    ("wives", "wife"), ("lives", "life"), ("halves", "half"),
    ("wolves", "wolf"), ("shelves", "shelf"), ("calves", "calf"),
    ("thieves", "thief"), ("loaves", "loaf"), ("cacti", "cactus"),
    ("fungi", "fungus"), ("nuclei", "nucleus"), ("radii", "radius"),
    ("stimuli", "stimulus"), ("syllabi", "syllabus"), ("alumni", "alumnus"),
    ("appendices", "appendix"), ("bases", "basis"), ("axes", "axis"),
    ("diagnoses", "diagnosis"), ("synopses", "synopsis"),
    ("parentheses", "parenthesis"), ("analyses", "analysis"),
    ("data", "datum"),
]
ADJ_EXC = [
    ("better", "good"), ("best", "good"), ("worse", "bad"), ("worst", "bad"),
    ("bigger", "big"), ("biggest", "big"), ("easier", "easy"),
    ("easiest", "easy"), ("happier", "happy"), ("happiest", "happy"),
    ("hotter", "hot"), ("hottest", "hot"), ("thinner", "thin"),
    ("thinnest", "thin"), ("fatter", "fat"), ("fattest", "fat"),
    ("wetter", "wet"), ("wettest", "wet"), ("sadder", "sad"),
    ("saddest", "sad"), ("redder", "red"), ("reddest", "red"),
    ("busier", "busy"), ("busiest", "busy"), ("heavier", "heavy"),
    ("heaviest", "heavy"), ("prettier", "pretty"), ("prettiest", "pretty"),
    ("funnier", "funny"), ("funniest", "funny"), ("drier", "dry"),
    ("driest", "dry"), ("shyer", "shy"), ("shyest", "shy"),
    ("dirtier", "dirty"), ("dirtiest", "dirty"), ("farther", "far"),
    ("farthest", "far"), ("further", "far"), ("furthest", "far"),
]

HEADER = [
    "  1 Miniature lexical database in WordNet 3.0 database file layout.",
    "  2 Generated for tests; lemmas, senses and pointers are a small subset.",
]


def build(pos, synsets, antonyms, lexfile):
    # Deduplicate synsets with identical member lists while keeping order.
    seen, uniq = set(), []
    for s in synsets:
        key = tuple(s)
        if key not in seen:
            seen.add(key)
            uniq.append(s)
    synsets = uniq
    first_syn = {}
    for i, s in enumerate(synsets):
        for w in s:
            first_syn.setdefault(w, i)
    ptrs = {i: [] for i in range(len(synsets))}
    for a, b in antonyms:
        ia, ib = first_syn[a], first_syn[b]
        wa = synsets[ia].index(a) + 1
        wb = synsets[ib].index(b) + 1
        ptrs[ia].append((ib, f"{wa:02x}{wb:02x}"))
        ptrs[ib].append((ia, f"{wb:02x}{wa:02x}"))
    ss = "n" if pos == "n" else "a"

    def render(offsets):
        lines = []
        for i, s in enumerate(synsets):
            words = " ".join(f"{w} 0" for w in s)
            p = " ".join(f"! {offsets[j]:08d} {pos} {st}" for j, st in ptrs[i])
            pc = f"{len(ptrs[i]):03d}"
            body = f"{offsets[i]:08d} {lexfile:02d} {ss} {len(s):02x} {words} {pc}"
            if p:
                body += " " + p
            body += f" | fixture sense of {s[0]}  "
            lines.append(body)
        return lines

    # Offsets have fixed width, so two passes converge.
    offsets = [0] * len(synsets)
    for _ in range(2):
        pos_bytes = sum(len(h) + 1 for h in HEADER)
        lines = render(offsets)
        new = []
        for line in lines:
            new.append(pos_bytes)
            pos_bytes += len(line) + 1
        offsets = new
    lines = render(offsets)
    data = "\n".join(HEADER + lines) + "\n"
    for line, off in zip(lines, offsets):
        assert data[off:off + len(line)] == line

    index = {}
    for i, s in enumerate(synsets):
        for w in s:
            index.setdefault(w, []).append(i)
    idx_lines = []
    for w in sorted(index):
        syns = index[w]
        has_ant = any(ptrs[i] and w in [synsets[i][int(st[:2], 16) - 1] for _, st in ptrs[i]] for i in syns)
        psyms = ["!"] if has_ant else []
        idx_lines.append(
            f"{w} {pos} {len(syns)} {len(psyms)} "
            + "".join(p + " " for p in psyms)
            + f"{len(syns)} 0 "
            + " ".join(f"{offsets[i]:08d}" for i in syns)
            + "  "
        )
    return data, "\n".join(HEADER + idx_lines) + "\n"


def main():
    os.makedirs(OUT, exist_ok=True)
    nd, ni = build("n", NOUN_SYNSETS, NOUN_ANTONYMS, 6)
    ad, ai = build("a", ADJ_SYNSETS, ADJ_ANTONYMS, 0)
    files = {
        "data.noun": nd, "index.noun": ni, "data.adj": ad, "index.adj": ai,
        "noun.exc": "".join(f"{a} {b}\n" for a, b in sorted(NOUN_EXC)),
        "adj.exc": "".join(f"{a} {b}\n" for a, b in sorted(ADJ_EXC)),
    }
    for name, text in files.items():
        with open(os.path.join(OUT, name), "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
