"""Regenerate the mini-corpus fixture. Output is deterministic."""

import random

rng = random.Random(20161)

THEMES = {
    "sepsis": dict(
        titles=["Early goal directed therapy for septic shock", "Antibiotic timing in severe sepsis",
                "Sepsis outcomes in elderly patients", "Fluid resuscitation in septic shock",
                "Procalcitonin guided antibiotics in sepsis"],
        words="sepsis septic shock bacteremia infection antibiotics vasopressors lactate fluid resuscitation "
              "hypotension fever cultures gram negative elderly mortality organ failure norepinephrine".split(),
        mesh=["Sepsis", "Shock, Septic", "Anti-Bacterial Agents", "Aged"],
    ),
    "mi": dict(
        titles=["Troponin testing in acute myocardial infarction", "Electrocardiogram findings in acute coronary syndrome",
                "Chest pain evaluation in the emergency department", "Diagnosis of myocardial infarction in women",
                "ST elevation myocardial infarction management"],
        words="myocardial infarction chest pain troponin electrocardiogram coronary ischemia angina st elevation "
              "cardiac enzymes diaphoresis dyspnea artery occlusion catheterization".split(),
        mesh=["Myocardial Infarction", "Chest Pain", "Troponin", "Electrocardiography"],
    ),
    "asthma": dict(
        titles=["Inhaled corticosteroids in childhood asthma", "Management of acute asthma exacerbation in children",
                "Bronchodilator therapy for pediatric wheezing", "Asthma control in adolescents",
                "Nebulized albuterol for acute wheeze"],
        words="asthma wheezing bronchodilator albuterol corticosteroids inhaled child pediatric cough airway "
              "exacerbation nebulizer spirometry dyspnea allergy".split(),
        mesh=["Asthma", "Child", "Bronchodilator Agents", "Adrenal Cortex Hormones"],
    ),
    "pe": dict(
        titles=["D-dimer testing for suspected pulmonary embolism", "CT pulmonary angiography accuracy",
                "Wells score and pulmonary embolism", "Ventilation perfusion scanning in pregnancy",
                "Diagnostic strategies for venous thromboembolism"],
        words="pulmonary embolism dimer angiography thrombosis venous clot dyspnea tachycardia hypoxia wells "
              "perfusion ventilation scan pleuritic anticoagulation".split(),
        mesh=["Pulmonary Embolism", "Fibrin Fibrinogen Degradation Products", "Angiography", "Venous Thrombosis"],
    ),
    "meningitis": dict(
        titles=["Bacterial meningitis in adults", "Lumbar puncture findings in meningitis",
                "Neck stiffness and fever as signs of meningitis", "Viral versus bacterial meningitis",
                "Meningococcal disease presentation"],
        words="meningitis headache fever neck stiffness photophobia lumbar puncture cerebrospinal fluid "
              "meningococcal confusion rash kernig petechiae bacterial".split(),
        mesh=["Meningitis, Bacterial", "Headache", "Spinal Puncture", "Fever"],
    ),
}
FILLER = ("patients study clinical results we report cases hospital treatment outcomes analysis data "
          "retrospective cohort trial group compared significant increased associated risk").split()
NOISE_TITLES = ["Hospital staffing and patient outcomes", "Cost analysis of outpatient care",
                "Medication adherence in chronic disease", "Dermatologic findings in psoriasis",
                "Orthopedic outcomes after hip fracture"]
NOISE_WORDS = ("psoriasis skin plaques fracture hip surgery adherence medication cost outpatient "
               "staffing nurses diabetes insulin glucose rash").split()

LEXICON = [
    ("sepsis", "C0243026", "Disease or Syndrome", "Sepsis"),
    ("septic shock", "C0036983", "Disease or Syndrome", "Septic Shock"),
    ("bacteremia", "C0004610", "Disease or Syndrome", "Bacteremia"),
    ("myocardial infarction", "C0027051", "Disease or Syndrome", "Myocardial Infarction"),
    ("chest pain", "C0008031", "Sign or Symptom", "Chest Pain"),
    ("troponin", "C0041199", "Laboratory Procedure", "Troponin measurement"),
    ("asthma", "C0004096", "Disease or Syndrome", "Asthma"),
    ("wheezing", "C0043144", "Sign or Symptom", "Wheezing"),
    ("albuterol", "C0001927", "Pharmacologic Substance", "Albuterol"),
    ("pulmonary embolism", "C0034065", "Disease or Syndrome", "Pulmonary Embolism"),
    ("dimer", "C0060323", "Laboratory Procedure", "Fibrin fragment D"),
    ("meningitis", "C0025289", "Disease or Syndrome", "Meningitis"),
    ("headache", "C0018681", "Sign or Symptom", "Headache"),
    ("neck stiffness", "C0151315", "Sign or Symptom", "Neck stiffness"),
    ("lumbar puncture", "C0553794", "Diagnostic Procedure", "Lumbar puncture"),
    ("fever", "C0015967", "Sign or Symptom", "Fever"),
    ("dyspnea", "C0013404", "Sign or Symptom", "Dyspnea"),
    ("hypotension", "C0020649", "Finding", "Hypotension"),
    ("hospital", "C0019994", "Health Care Related Organization", "Hospital"),
]

EMBED_CLUSTERS = {
    "sepsis": "sepsis septic bacteremia infection shock antibiotics",
    "mi": "myocardial infarction troponin coronary ischemia angina",
    "asthma": "asthma wheezing bronchodilator albuterol wheeze",
    "pe": "pulmonary embolism thrombosis clot dimer",
    "meningitis": "meningitis headache photophobia stiffness",
    "general": "fever elderly child patient pain",
}

TOPICS = [
    (1, "treatment", "sepsis",
     "78 y/o m brought in from nursing home with fever, hypotension and confusion. Denies chest pain. "
     "Blood cultures grew gram negative rods; lactate 4.1.",
     "An elderly man with fever, low blood pressure and positive blood cultures.",
     "78 y/o m with fever and hypotension, cultures positive for gram negative bacteremia, no chest pain."),
    (2, "diagnosis", "mi",
     "62 y/o f with crushing substernal chest pain radiating to the left arm, diaphoresis. "
     "No fever. ECG with ST elevation in the anterior leads.",
     "A woman with chest pain, sweating and ECG changes.",
     "62 yo woman with chest pain, diaphoresis and st elevation on electrocardiogram, without fever."),
    (3, "treatment", "asthma",
     "7 y/o boy with cough and wheezing for two days, worse at night. Denies fever. Uses inhaler at home.",
     "A young boy with wheezing and a night cough.",
     "7 y/o boy with acute wheezing and cough, no fever, known asthma."),
    (4, "test", "pe",
     "45 year old woman on oral contraceptives with sudden dyspnea, pleuritic pain and tachycardia. "
     "No leg swelling. Oxygen saturation 89 percent.",
     "A woman with sudden shortness of breath after a long flight.",
     "45-year-old woman with sudden dyspnea, tachycardia and hypoxia, suspected pulmonary embolism."),
    (5, "diagnosis", "meningitis",
     "19 yo college student with headache, fever and neck stiffness, photophobia. Denies rash. "
     "Kernig sign positive.",
     "A student with a bad headache, fever and a stiff neck.",
     "19 yo m with headache, fever, neck stiffness and photophobia, negative for rash."),
]


def sentence(words, n):
    return " ".join(rng.choice(words) for _ in range(n)).capitalize() + "."


def make_docs():
    docs, keywords, theme_of = [], [], {}
    doc_no = 1000
    for theme, spec in THEMES.items():
        for i in range(18):
            doc_no += 1
            doc_id = f"PMC{doc_no}"
            focus = rng.random()
            other = THEMES[rng.choice([t for t in THEMES if t != theme])]["words"]
            pool = spec["words"] * (1 + round(3 * focus)) + other * 2 + FILLER * 2
            title = spec["titles"][i % 5] + ("" if i < 5 else f" ({i})")
            abstract = " ".join(sentence(pool, rng.randint(8, 14)) for _ in range(3))
            body = " ".join(sentence(pool, rng.randint(10, 18)) for _ in range(6))
            docs.append((doc_id, title, abstract, body))
            kws = rng.sample(spec["mesh"], 2)
            keywords.append(f"{doc_id}|{', '.join(kws)}")
            theme_of[doc_id] = (theme, focus)
    for i in range(10):
        doc_no += 1
        doc_id = f"PMC{doc_no}"
        pool = NOISE_WORDS * 2 + FILLER + rng.choice(list(THEMES.values()))["words"]
        title = NOISE_TITLES[i % 5]
        abstract = " ".join(sentence(pool, rng.randint(8, 14)) for _ in range(3))
        body = " ".join(sentence(pool, rng.randint(10, 18)) for _ in range(6))
        docs.append((doc_id, title, abstract, body))
        theme_of[doc_id] = ("noise", 0.0)
    order = list(range(len(docs)))
    rng.shuffle(order)
    return [docs[i] for i in order], keywords, theme_of


def grade_of(theme_of, doc, theme):
    t, focus = theme_of[doc]
    if t != theme or focus < 0.25:
        return 0
    return 2 if focus > 0.65 else 1


def write_docs(docs):
    with open("documents.txt", "w") as f:
        f.write("\n---\n".join(
            f"#id: {d}\n#title: {t}\n#abstract: {a}\n#body: {b}" for d, t, a, b in docs) + "\n")


def write_topics():
    with open("topics.txt", "w") as f:
        for tid, ttype, _, note, desc, summ in TOPICS:
            f.write(f"#topic: {tid}\n#type: {ttype}\n#note: {note}\n#desc: {desc}\n#summary: {summ}\n\n")


def write_qrels(theme_of):
    qrels, strata = [], []
    for tid, _, theme, *_ in TOPICS:
        on = [d for d, (t, _) in theme_of.items() if t == theme]
        off = [d for d, (t, _) in theme_of.items() if t != theme]
        rng.shuffle(off)
        # stratum 1 fully judged, stratum 2 judged at rate one half
        s1 = on[:10] + off[:4]
        s2 = on[10:] + off[4:12]
        for d in sorted(s1):
            grade = grade_of(theme_of, d, theme)
            qrels.append(f"{tid} 1 {d} {grade}")
        judged = set(rng.sample(s2, len(s2) // 2))
        for d in sorted(s2):
            if d in judged:
                grade = grade_of(theme_of, d, theme)
            else:
                grade = -1
            qrels.append(f"{tid} 2 {d} {grade}")
        strata.append(f"{tid} 1 {len(s1)}")
        strata.append(f"{tid} 2 {len(s2)}")
    with open("qrels.txt", "w") as f:
        f.write("\n".join(qrels) + "\n")
    with open("strata.txt", "w") as f:
        f.write("\n".join(strata) + "\n")


def write_lexicon():
    with open("lexicon.txt", "w") as f:
        for phrase, cui, sty, name in LEXICON:
            f.write(f"{phrase}|{cui}|{sty}|{name}\n")


def write_embeddings():
    dim = 8
    centers = {k: [rng.gauss(0, 1) for _ in range(dim)] for k in EMBED_CLUSTERS}
    with open("embeddings.txt", "w") as f:
        for k, words in EMBED_CLUSTERS.items():
            for w in words.split():
                v = [c + rng.gauss(0, 0.25) for c in centers[k]]
                f.write(w + " " + " ".join(f"{x:.5f}" for x in v) + "\n")


def write_keywords(keywords):
    with open("keywords.txt", "w") as f:
        f.write("\n".join(keywords) + "\n")


docs, keywords, theme_of = make_docs()
write_docs(docs)
write_topics()
write_qrels(theme_of)
write_lexicon()
write_embeddings()
write_keywords(keywords)
