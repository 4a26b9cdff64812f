#!/usr/bin/env python3
"""Regenerates fixtures/world.json and fixtures/scene_vqa.jsonl.

Output is a pure function of SEED; the files are committed, so this only
needs rerunning when the fixture design changes.
"""
import json
import random
from pathlib import Path

SEED = 20240611
N = 50
CATEGORIES = ["cat", "dog", "cup", "car", "bird"]
COLORS = ["black", "white", "brown", "red", "blue"]
WIDTH, HEIGHT = 640, 480

ROOT = Path(__file__).resolve().parent.parent / "fixtures"


def vqa_prompt(q):
    return f"Question: {q} Short answer: "


def choice_list(choices):
    return "[" + ", ".join("'" + c + "'" for c in choices) + "]"


def plural(cat):
    return cat + "s"


def make_scene(rng, idx):
    objects = []
    count = rng.randint(2, 7)
    for oid in range(1, count + 1):
        w, h = rng.randint(20, 90), rng.randint(20, 90)
        left = rng.randint(0, WIDTH - w - 1)
        lower = rng.randint(0, HEIGHT - h - 1)
        objects.append({
            "id": oid,
            "category": rng.choice(CATEGORIES),
            "box": [left, lower, left + w, lower + h],
            "attributes": [rng.choice(COLORS)],
            "depth": round(rng.uniform(0.5, 9.5), 2),
        })
    return {"image_ref": f"img{idx:03d}", "width": WIDTH, "height": HEIGHT, "objects": objects,
            "scene_qa": {}, "patch_qa": []}


COUNT_FORMS = ["How many {color} {cats} are there?", "How many {color} {cats} can be seen?"]
EXISTS_FORMS = ["Is there a {cat} in the picture?", "Can you spot a {cat}?", "Does this image contain a {cat}?",
                "Is a {cat} visible?"]
COLOR_FORMS = ["What color is the {cat}?", "Which color is the {cat}?", "What is the color of the {cat}?",
               "What colour is the {cat}?", "What color does the {cat} have?", "Tell me the color of the {cat}."]


def pick_form(rng, forms, used, **fields):
    """A phrasing not used yet, or None. Scripted code-LM rules match on the
    question text, so every question in the set must be distinct."""
    options = [f.format(**fields) for f in forms]
    options = [q for q in options if q not in used]
    return rng.choice(options) if options else None


def build_item(rng, idx, scene, used):
    objs = scene["objects"]
    kind = ["count", "exists", "color"][idx % 3]
    if kind == "count":
        question = None
        while question is None:
            cat = rng.choice([o["category"] for o in objs])
            color = rng.choice(COLORS)
            question = pick_form(rng, COUNT_FORMS, used, color=color, cats=plural(cat))
        answer = str(sum(1 for o in objs if o["category"] == cat and color in o["attributes"]))
        followup = f"Count the {color} {plural(cat)}. How many are there?"
        program = (f"\n    {cat}_patches = image.find('{cat}')\n"
                   f"    matches = [p for p in {cat}_patches if p.verify_property('{cat}', '{color}')]\n"
                   f"    return str(len(matches))\n")
        pool = [str(n) for n in range(0, 8) if str(n) != answer]
        choices = [answer] + rng.sample(pool, 3)
    elif kind == "exists":
        question = None
        while question is None:
            cat = rng.choice(CATEGORIES)
            question = pick_form(rng, EXISTS_FORMS, used, cat=cat)
        answer = "yes" if any(o["category"] == cat for o in objs) else "no"
        followup = f"Can you see any {cat}?"
        program = f"\n    return bool_to_yesno(image.exists('{cat}'))\n"
        choices = ["yes", "no"]
    else:
        # Pick a category with exactly one instance so the question is well posed.
        counts = {}
        for o in objs:
            counts[o["category"]] = counts.get(o["category"], 0) + 1
        singles = sorted(c for c, n in counts.items() if n == 1)
        singles = [c for c in singles if pick_form(rng, COLOR_FORMS, used, cat=c)]
        if not singles:
            cat = next(c for c in CATEGORIES if pick_form(rng, COLOR_FORMS, used, cat=c))
            objs[0]["category"] = cat
            for o in objs[1:]:
                if o["category"] == cat:
                    o["category"] = next(c for c in CATEGORIES if c != cat)
            singles = [cat]
        cat = singles[0]
        target = next(o for o in objs if o["category"] == cat)
        answer = target["attributes"][0]
        question = pick_form(rng, COLOR_FORMS, used, cat=cat)
        followup = f"Look at the {cat}. What color is it?"
        program = (f"\n    {cat}_patches = image.find('{cat}')\n"
                   f"    return {cat}_patches[0].simple_query('{question}')\n")
        scene["patch_qa"].append({"object": target["id"], "question": question, "answer": answer})
        choices = [answer] + rng.sample([c for c in COLORS if c != answer], 3)
    rng.shuffle(choices)

    # A handful of programs fail, so the error tables have something to count.
    if idx % 10 == 7:
        program = program.replace("image.", "image_p.", 1)
    elif idx % 17 == 5:
        program = "\n    return len(image.find('cat')\n"
    elif idx % 23 == 13:
        program = "\n    answer = 'no'\n      return answer\n"
    elif idx % 19 == 11:
        program = "\n    patches = image.find('unicorn')\n    return patches[0].simple_query('What is this?')\n"

    # The e2e model is wrong now and then.
    vlm_answer = answer if idx % 6 else next(c for c in choices if c != answer)
    scene["scene_qa"][question] = vlm_answer
    scene["scene_qa"][followup] = answer

    annotations = [answer] * 8 + [rng.choice(choices), rng.choice(choices)]
    record = {"id": f"q{idx:03d}", "image_ref": scene["image_ref"], "question": question,
              "answers": annotations, "choices": choices, "question_type": kind, "split": "val"}
    return record, program, followup, vlm_answer


def main():
    rng = random.Random(SEED)
    scenes, records = [], []
    code_rules, instruct_rules, instruct_scores, vlm_scores = [], [], [], []
    generic_prefix = []
    used = set()
    for idx in range(N):
        scene = make_scene(rng, idx)
        record, program, followup, vlm_answer = build_item(rng, idx, scene, used)
        used.add(record["question"])
        scenes.append(scene)
        records.append(record)
        q, choices, answer = record["question"], record["choices"], record["answers"][0]
        head = f"Question: {q}\n"
        mc_head = f"{head}Choices: {choice_list(choices)}\n"

        code_rules.append({"match": {"contains": f"# {q}\n"}, "completion": program})

        for block in (head, mc_head):
            instruct_scores.append({"match": {"suffix": block}, "continuation": "Follow-up:", "logprob": -0.2})
            instruct_scores.append({"match": {"suffix": block}, "continuation": "Answer to the original question:",
                                    "logprob": -1.7})
            instruct_rules.append({"match": {"suffix": block + "Follow-up: "}, "completion": followup + "\n"})
        tail = f"Follow-up: {followup}\nFollow-up answer: {answer}\nAnswer to the original question: "
        instruct_rules.append({"match": {"suffix": tail}, "completion": answer + "\n"})
        for i, c in enumerate(choices):
            instruct_scores.append({"match": {"suffix": tail}, "continuation": c,
                                    "logprob": -0.1 if c == answer else -2.0 - 0.1 * i})

        for i, c in enumerate(choices):
            vlm_scores.append({"match": {"exact": vqa_prompt(q)}, "image_ref": record["image_ref"], "continuation": c,
                               "logprob": -0.3 if c == vlm_answer else -1.5 - 0.2 * i})

        distinct = list(dict.fromkeys(record["answers"]))
        judge_tail = f"Answer: {' or '.join(distinct)}\nCandidate: {answer}\nIs the candidate correct? "
        instruct_scores.append({"match": {"suffix": judge_tail}, "continuation": "yes", "logprob": -0.2})
        instruct_scores.append({"match": {"suffix": judge_tail}, "continuation": "no", "logprob": -1.6})

    generic_prefix.append({"match": {"any": True}, "continuation": "Follow-up:", "logprob": -2.0})
    generic_prefix.append({"match": {"any": True}, "continuation": "Answer to the original question:",
                           "logprob": -0.3})
    instruct_scores.append({"match": {"suffix": "Is the candidate correct? "}, "continuation": "yes", "logprob": -1.2})
    instruct_scores.append({"match": {"suffix": "Is the candidate correct? "}, "continuation": "no", "logprob": -0.4})
    vocab = [str(n) for n in range(10)] + ["yes", "no"] + COLORS
    for i, word in enumerate(vocab):
        instruct_scores.append({"match": {"contains": " Most similar choice: "}, "continuation": word,
                                "logprob": -1.0 - 0.05 * i})

    world = {
        "fallback_answer": "unknown",
        "scenes": scenes,
        "language_models": {
            "code_lm": {"rules": code_rules},
            "instruct_lm": {"rules": instruct_rules, "scores": instruct_scores + generic_prefix},
            "vlm": {"scores": vlm_scores},
        },
    }
    ROOT.mkdir(exist_ok=True)
    (ROOT / "world.json").write_text(json.dumps(world, indent=1) + "\n")
    with open(ROOT / "scene_vqa.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")


if __name__ == "__main__":
    main()
