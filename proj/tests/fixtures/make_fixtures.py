#!/usr/bin/env python3
"""Regenerates the offline fixture corpus. Output is deterministic."""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

SPECIALTIES = {
    "cardiology": {
        "findings": ["chest pain radiating to the left arm", "exertional dyspnea", "orthopnea", "bilateral ankle edema",
                     "a new holosystolic murmur", "syncope on exertion", "jugular venous distension", "palpitations"],
        "labs": [("troponin I", "ng/mL", (0.4, 12.0)), ("BNP", "pg/mL", (450, 2400)),
                 ("LDL cholesterol", "mg/dL", (160, 240)), ("potassium", "mEq/L", (5.8, 7.1))],
        "diagnoses": ["acute myocardial infarction", "aortic stenosis", "heart failure with reduced ejection fraction",
                      "pericarditis", "hypertrophic cardiomyopathy", "atrial fibrillation", "mitral regurgitation",
                      "pulmonary embolism"],
        "drugs": ["aspirin", "metoprolol", "furosemide", "lisinopril", "amiodarone", "heparin"],
        "tests": ["ECG", "echocardiogram", "coronary angiography", "chest X-ray"],
    },
    "neurology": {
        "findings": ["sudden right-sided weakness", "slurred speech", "a unilateral throbbing headache",
                     "ascending symmetric weakness", "intention tremor", "resting tremor", "neck stiffness",
                     "diplopia that worsens in the evening"],
        "labs": [("CSF protein", "mg/dL", (80, 220)), ("CSF white cell count", "cells/uL", (150, 900)),
                 ("serum sodium", "mEq/L", (118, 127)), ("glucose", "mg/dL", (38, 55))],
        "diagnoses": ["ischemic stroke", "Guillain-Barre syndrome", "multiple sclerosis", "myasthenia gravis",
                      "Parkinson disease", "bacterial meningitis", "migraine", "subarachnoid hemorrhage"],
        "drugs": ["alteplase", "levodopa", "pyridostigmine", "sumatriptan", "ceftriaxone", "IVIG"],
        "tests": ["CT head", "MRI brain", "lumbar puncture", "nerve conduction studies"],
    },
    "pharmacology": {
        "findings": ["a dry cough", "gingival hyperplasia", "red man syndrome", "tendon rupture",
                     "QT prolongation", "hyperkalemia", "ototoxicity", "disulfiram-like reaction"],
        "labs": [("serum creatinine", "mg/dL", (1.8, 3.9)), ("INR", "", (3.5, 7.8)),
                 ("digoxin level", "ng/mL", (2.4, 4.1)), ("lithium level", "mEq/L", (1.8, 3.2))],
        "diagnoses": ["ACE inhibitor toxicity", "phenytoin adverse effect", "vancomycin infusion reaction",
                      "fluoroquinolone adverse effect", "warfarin interaction", "aminoglycoside toxicity",
                      "metronidazole interaction", "lithium toxicity"],
        "drugs": ["lisinopril", "phenytoin", "vancomycin", "ciprofloxacin", "warfarin", "gentamicin", "metronidazole"],
        "tests": ["drug level monitoring", "renal function panel", "ECG", "audiometry"],
    },
    "infectious_disease": {
        "findings": ["fever with rigors", "a productive cough", "dysuria", "a target-shaped rash", "night sweats",
                     "bloody diarrhea", "a painless genital ulcer", "cervical lymphadenopathy"],
        "labs": [("white cell count", "x10^9/L", (14.5, 28.0)), ("procalcitonin", "ng/mL", (2.1, 9.5)),
                 ("CD4 count", "cells/uL", (40, 180)), ("lactate", "mmol/L", (2.4, 5.8))],
        "diagnoses": ["community-acquired pneumonia", "pyelonephritis", "Lyme disease", "tuberculosis",
                      "Clostridioides difficile colitis", "primary syphilis", "infectious mononucleosis",
                      "Pneumocystis pneumonia"],
        "drugs": ["amoxicillin", "doxycycline", "ceftriaxone", "vancomycin", "isoniazid", "benzathine penicillin"],
        "tests": ["blood cultures", "sputum Gram stain", "urinalysis", "chest X-ray"],
    },
    "endocrinology": {
        "findings": ["polyuria and polydipsia", "heat intolerance", "weight gain with fatigue", "a neck mass",
                     "episodic headaches with sweating", "proximal muscle weakness", "hyperpigmentation",
                     "galactorrhea"],
        "labs": [("TSH", "mIU/L", (0.01, 0.08)), ("HbA1c", "%", (8.2, 11.9)), ("serum calcium", "mg/dL", (11.2, 13.4)),
                 ("morning cortisol", "ug/dL", (1.2, 2.9))],
        "diagnoses": ["type 2 diabetes mellitus", "Graves disease", "hypothyroidism", "primary hyperparathyroidism",
                      "pheochromocytoma", "Cushing syndrome", "Addison disease", "prolactinoma"],
        "drugs": ["metformin", "methimazole", "levothyroxine", "hydrocortisone", "cabergoline", "insulin glargine"],
        "tests": ["thyroid scan", "dexamethasone suppression test", "plasma metanephrines", "ACTH stimulation test"],
    },
}

LABELS = "ABCDE"


def fmt_value(lo, hi, rng):
    v = rng.uniform(lo, hi)
    return f"{v:.1f}" if hi < 20 else f"{int(round(v))}"


def make_question(specialty, pool, n, rng):
    age = rng.randint(19, 84)
    sex = rng.choice(["man", "woman"])
    f1, f2 = rng.sample(pool["findings"], 2)
    lab, unit, (lo, hi) = rng.choice(pool["labs"])
    value = fmt_value(lo, hi, rng)
    days = rng.randint(2, 21)
    options = rng.sample(pool["diagnoses"], 5)
    answer = rng.choice(LABELS)
    stem = (f"A {age}-year-old {sex} presents with {f1} and {f2} for {days} days. "
            f"Laboratory studies show a {lab} of {value}{(' ' + unit) if unit else ''}. "
            f"Which of the following is the most likely diagnosis?")
    q = {"id": f"{specialty[:4]}-{n:02d}", "specialty": specialty, "stem": stem,
         "options": dict(zip(LABELS, options)), "answer": answer}
    ctx = {"age": age, "sex": sex, "f1": f1, "f2": f2, "lab": lab, "unit": unit, "value": value, "days": days}
    return q, ctx


OPENERS_R1 = [
    "Okay, so I need to figure out the most likely diagnosis for this {age}-year-old {sex}.",
    "Alright, I'm going to work through this one slowly because these vignettes tend to hide the key clue.",
    "Let me start by reading the question again carefully so that I understand exactly what is being asked.",
    "I'm a little rusty on some of this, so I want to reason it out step by step instead of guessing.",
    "The question wants a single best answer, and there are five options to choose from.",
]
OPENERS_QWEN = [
    "Let me analyze this step by step.",
    "The patient is a {age}-year-old {sex}, and the question asks for the single best diagnosis.",
    "I will first restate the problem in my own words, then go through the options one at a time.",
    "It is important not to jump to a conclusion before looking at every piece of the vignette.",
    "There are five answer choices, and usually two of them are close to each other.",
]
FILLER = [
    "Hmm, let me think about this more carefully.",
    "Wait, I want to make sure I am not mixing this up with something similar.",
    "Okay, that seems reasonable so far, but I am not fully convinced yet.",
    "Let me slow down here, because this part is easy to get wrong.",
    "I think I have seen a question like this before, although the details were different.",
    "Hmm, that is an interesting point, and it might change my thinking a little.",
    "Actually, let me come back to that later and first finish going through everything.",
    "I should be systematic about this rather than relying on a gut feeling.",
]


def reasoning(q, ctx, pool, rng, style, final):
    opts = q["options"]
    right = opts[q["answer"]]
    unit = f" {ctx['unit']}" if ctx["unit"] else ""
    lab_phrase = f"{ctx['lab']} of {ctx['value']}{unit}"
    others = [(l, opts[l]) for l in LABELS if l != q["answer"]]
    rng.shuffle(others)
    drugs = rng.sample(pool["drugs"], 3)
    tests = rng.sample(pool["tests"], 3)
    extra = [f for f in pool["findings"] if f not in (ctx["f1"], ctx["f2"])]

    def fill(k=1):
        return " ".join(rng.sample(FILLER, k))

    paras = []
    openers = OPENERS_R1 if style == "r1" else OPENERS_QWEN
    paras.append(" ".join(o.format(**ctx) for o in openers) + " " + fill(2))
    paras.append(f"So, the vignette describes {ctx['f1']} and {ctx['f2']}, present for {ctx['days']} days. "
                 f"That timeline points to a subacute process rather than something that started this morning. "
                 + fill(1))
    paras.append(f"The {ctx['lab']} is {ctx['value']}{unit}, which is clearly outside the reference range. "
                 f"That number matters a lot here. " + fill(2))
    paras.append(f"First, I should think about {right}. It classically presents with {ctx['f1']}, "
                 f"and an abnormal {ctx['lab']} fits well with it. "
                 + rng.choice([f"Let me recall how {right} usually develops. The typical course runs over days to weeks, "
                               f"and {ctx['days']} days is within that window.",
                               f"I remember that {right} is one of the classic causes of {ctx['f2']}, "
                               f"especially in a patient around {ctx['age']} years old."])
                 + " " + fill(1))
    paras.append(rng.choice(["Hmm, but I should not anchor on the first idea. There are five options and each deserves a look.",
                             "Wait, I should go through every option before committing, since the distractors can be close."])
                 + " " + fill(2))
    for label, dx in others:
        body = [rng.choice([f"Hmm, what about {dx}? That usually looks different.",
                            f"Wait, could it be {dx} instead? Let me check that against the findings.",
                            f"Option {label} is {dx}. I remember it can cause {rng.choice(extra)} as well."]),
                fill(2),
                rng.choice([f"However, {dx} would not explain a {lab_phrase}, so it seems less likely.",
                            f"However, the timeline of {ctx['days']} days does not really match {dx}.",
                            f"But {ctx['f2']} is not a typical feature of {dx}, so I will put it aside for now."]),
                fill(1)]
        paras.append(" ".join(body))
    paras.append(f"Another thing to consider is the workup. A {tests[0]} would help confirm the suspicion, "
                 f"and a {tests[1]} could rule out the main alternatives. " + fill(2))
    paras.append(f"Treatment would often involve {drugs[0]} if the diagnosis holds, and sometimes {drugs[1]}, "
                 f"but the question only asks for the diagnosis. " + fill(1))
    paras.append(rng.choice(["Let me double-check by going back over the stem once more to make sure I am not missing a detail.",
                             "Wait, let me reconsider whether I skipped any clue in the stem.",
                             "Hmm, I want to be careful here because these questions often include a distractor."])
                 + " " + fill(3))
    paras.append(f"Because the combination of {ctx['f1']} with {ctx['f2']} and the {ctx['lab']} result all line up, "
                 f"{right} remains the best fit. " + fill(1))
    paras.append(rng.choice([f"Let me recap. The key points are {ctx['f1']}, {ctx['f2']}, a duration of {ctx['days']} days "
                             f"and a {lab_phrase}.",
                             f"To summarize the evidence: {ctx['f1']}, {ctx['f2']}, and the {ctx['lab']} value of {ctx['value']}{unit}."])
                 + f" So {others[0][1]} and {others[1][1]} are unlikely, since neither would produce this particular pattern."
                 + f" Therefore, the answer is {final}.")
    return "\n\n".join(paras)


def main():
    rng = random.Random(20240601)
    questions, traces, lexicon = [], [], set()
    for specialty, pool in SPECIALTIES.items():
        for k in ("findings", "diagnoses", "drugs", "tests"):
            lexicon.update(pool[k])
        lexicon.update(lab for lab, _, _ in pool["labs"])
        for n in range(10):
            q, ctx = make_question(specialty, pool, n, rng)
            questions.append(q)
            for model, style, p_wrong in (("deepseek-r1-7b", "r1", 0.15), ("qwen3-8b", "qwen", 0.25)):
                final = q["answer"]
                if rng.random() < p_wrong:
                    final = rng.choice([l for l in LABELS if l != q["answer"]])
                traces.append({"question_id": q["id"], "model": model,
                               "text": reasoning(q, ctx, pool, rng, style, final)})

    with open(HERE / "questions.jsonl", "w") as f:
        for q in questions:
            f.write(json.dumps(q) + "\n")
    with open(HERE / "traces.jsonl", "w") as f:
        for t in traces:
            f.write(json.dumps(t) + "\n")
    with open(HERE / "lexicon.txt", "w") as f:
        f.write("# clinical terms recognised as entities\n")
        for term in sorted(lexicon, key=str.lower):
            f.write(term + "\n")

    small = [q for q in questions if q["specialty"] in ("cardiology", "neurology")]
    small = [q for q in small if int(q["id"][-2:]) < 5]
    with open(HERE / "questions_small.jsonl", "w") as f:
        for q in small:
            f.write(json.dumps(q) + "\n")


if __name__ == "__main__":
    main()
