#!/usr/bin/env python3
"""Regenerates the test fixtures under tests/data/.

  coco_categories.json  the 80-category COCO instances taxonomy
  coco_fixture.json     20 images with captions and labels, merged layout
  vectors_50d.txt       10,000 x 50 word vectors in the text vector format

The vector table is synthetic: each COCO supercategory owns one axis, each
category gets a random direction in the remaining subspace, and words tied to
a category (its name tokens, synonyms, plurals) are built from those
directions plus noise. Everything else is filled from the wordfreq English
frequency list with random vectors. Output is fully determined by SEED.

Requires numpy and wordfreq. Run from the repository root.
"""

import json
import re
from pathlib import Path

import numpy as np
from wordfreq import top_n_list

SEED = 20240613
DIM = 50
VOCAB_SIZE = 10000
OUT = Path("tests/data")

CATEGORIES = [
    (1, "person", "person"), (2, "bicycle", "vehicle"), (3, "car", "vehicle"),
    (4, "motorcycle", "vehicle"), (5, "airplane", "vehicle"), (6, "bus", "vehicle"),
    (7, "train", "vehicle"), (8, "truck", "vehicle"), (9, "boat", "vehicle"),
    (10, "traffic light", "outdoor"), (11, "fire hydrant", "outdoor"),
    (13, "stop sign", "outdoor"), (14, "parking meter", "outdoor"), (15, "bench", "outdoor"),
    (16, "bird", "animal"), (17, "cat", "animal"), (18, "dog", "animal"),
    (19, "horse", "animal"), (20, "sheep", "animal"), (21, "cow", "animal"),
    (22, "elephant", "animal"), (23, "bear", "animal"), (24, "zebra", "animal"),
    (25, "giraffe", "animal"), (27, "backpack", "accessory"), (28, "umbrella", "accessory"),
    (31, "handbag", "accessory"), (32, "tie", "accessory"), (33, "suitcase", "accessory"),
    (34, "frisbee", "sports"), (35, "skis", "sports"), (36, "snowboard", "sports"),
    (37, "sports ball", "sports"), (38, "kite", "sports"), (39, "baseball bat", "sports"),
    (40, "baseball glove", "sports"), (41, "skateboard", "sports"), (42, "surfboard", "sports"),
    (43, "tennis racket", "sports"), (44, "bottle", "kitchen"), (46, "wine glass", "kitchen"),
    (47, "cup", "kitchen"), (48, "fork", "kitchen"), (49, "knife", "kitchen"),
    (50, "spoon", "kitchen"), (51, "bowl", "kitchen"), (52, "banana", "food"),
    (53, "apple", "food"), (54, "sandwich", "food"), (55, "orange", "food"),
    (56, "broccoli", "food"), (57, "carrot", "food"), (58, "hot dog", "food"),
    (59, "pizza", "food"), (60, "donut", "food"), (61, "cake", "food"),
    (62, "chair", "furniture"), (63, "couch", "furniture"), (64, "potted plant", "furniture"),
    (65, "bed", "furniture"), (67, "dining table", "furniture"), (70, "toilet", "furniture"),
    (72, "tv", "electronic"), (73, "laptop", "electronic"), (74, "mouse", "electronic"),
    (75, "remote", "electronic"), (76, "keyboard", "electronic"), (77, "cell phone", "electronic"),
    (78, "microwave", "appliance"), (79, "oven", "appliance"), (80, "toaster", "appliance"),
    (81, "sink", "appliance"), (82, "refrigerator", "appliance"), (84, "book", "indoor"),
    (85, "clock", "indoor"), (86, "vase", "indoor"), (87, "scissors", "indoor"),
    (88, "teddy bear", "indoor"), (89, "hair drier", "indoor"), (90, "toothbrush", "indoor"),
]

SYNONYMS = {
    "person": ["woman", "women", "man", "men", "lady", "guy", "boy", "girl", "child",
               "kid", "kids", "people", "player", "skier", "surfer", "catcher", "batter",
               "persons"],
    "bicycle": ["bike", "bikes", "bicycles"],
    "car": ["cars"],
    "motorcycle": ["motorbike", "motorcycles"],
    "airplane": ["plane", "planes", "jet", "airplanes"],
    "bus": ["buses"],
    "train": ["trains"],
    "truck": ["trucks"],
    "boat": ["boats"],
    "bench": ["benches"],
    "bird": ["birds"],
    "cat": ["cats", "kitten"],
    "dog": ["dogs", "puppy"],
    "horse": ["horses"],
    "cow": ["cows", "cattle"],
    "elephant": ["elephants"],
    "bear": ["bears"],
    "zebra": ["zebras"],
    "giraffe": ["giraffes"],
    "skis": ["skiing", "ski"],
    "surfboard": ["surfing"],
    "tennis racket": ["racquet"],
    "sports ball": ["ball"],
    "banana": ["bananas"],
    "apple": ["apples"],
    "orange": ["oranges"],
    "donut": ["doughnut", "donuts"],
    "couch": ["sofa"],
    "dining table": ["table"],
    "potted plant": ["plant"],
    "tv": ["television"],
    "cell phone": ["phone", "smartphone"],
    "refrigerator": ["fridge"],
    "oven": ["stove"],
    "book": ["books"],
    "teddy bear": ["teddy"],
    "laptop": ["laptops"],
    "keyboard": ["keyboards"],
}

# Captions per image id. Labels are category ids; a repeated id produces two
# label annotations of the same category.
IMAGES = [
    (139, 640, 426, [1, 1, 63, 72], [
        "A woman sitting on a couch watching TV.",
        "A lady relaxes on a sofa in front of a television.",
        "A woman is sitting on the couch in a living room.",
        "A person resting on a couch with the tv on.",
        "a woman sitting on a couch",
    ]),
    (285, 586, 640, [23], [
        "A large brown bear sitting in the grass.",
        "A big bear standing in a field.",
        "A brown bear looks at the camera.",
        "The bear is resting near some trees.",
    ]),
    (632, 640, 483, [65, 84, 64], [
        "A bedroom with a bed and a shelf of books.",
        "A neatly made bed next to a plant.",
        "A small room with a bed and many books.",
        "A potted plant beside a large bed.",
    ]),
    (724, 375, 500, [13], [
        "A stop sign on a street corner.",
        "A red stop sign next to the road.",
        "A street sign that says stop.",
        "A stop sign covered in snow.",
    ]),
    (776, 428, 640, [88, 88], [
        "Three teddy bears sitting together.",
        "A group of stuffed teddy bears.",
        "Teddy bears lined up on a shelf.",
        "A brown teddy bear next to a white one.",
    ]),
    (785, 640, 425, [1, 35], [
        "A woman skiing down a snowy hill.",
        "A skier on skis in the snow.",
        "A person riding skis down a mountain slope.",
        "A woman in a red jacket on skis.",
    ]),
    (802, 424, 640, [79, 82], [
        "A kitchen with an oven and a refrigerator.",
        "A white fridge next to a stove.",
        "An old oven in a small kitchen.",
        "A refrigerator standing beside the oven.",
    ]),
    (872, 621, 640, [1, 1, 39, 40], [
        "A man swinging a baseball bat.",
        "A baseball player holding a bat at the plate.",
        "A catcher with a glove behind the batter.",
        "A batter waits for the pitch.",
    ]),
    (885, 640, 427, [1, 43, 37], [
        "A man playing tennis with a racket.",
        "A tennis player hitting the ball.",
        "A woman swings her racket at a ball.",
        "A player serving a tennis ball.",
    ]),
    (1000, 640, 480, [1, 18, 34], [
        "A dog catching a frisbee in the park.",
        "A man throws a frisbee to his dog.",
        "A dog jumping to catch a frisbee.",
        "A boy and his dog playing with a frisbee.",
    ]),
    (1268, 640, 427, [16, 15], [
        "A small bird perched on a bench.",
        "A bird sitting on a wooden bench.",
        "A bench in a park with a bird.",
        "A bird standing on the back of a bench.",
    ]),
    (1296, 640, 480, [1, 77], [
        "A man talking on his cell phone.",
        "A woman looking at her phone.",
        "A person holding a phone near a window.",
        "A girl texting on a smartphone.",
    ]),
    (1353, 640, 427, [3, 6, 10], [
        "A bus driving down a busy street.",
        "Cars and a bus stopped at a traffic light.",
        "A city street with a bus and several cars.",
        "A red traffic light above a bus.",
    ]),
    (1425, 640, 480, [59, 67, 47], [
        "A pizza on a table next to a cup.",
        "A large pizza sitting on a dining table.",
        "A cheese pizza with a cup of coffee.",
        "A table set with pizza and drinks.",
    ]),
    (1490, 640, 428, [1, 42], [
        "A surfer riding a wave on a surfboard.",
        "A man on a surfboard in the ocean.",
        "A person carrying a surfboard on the beach.",
        "A woman paddling out on her surfboard.",
    ]),
    (1503, 640, 480, [73, 76, 74], [
        "A laptop next to a keyboard and a mouse.",
        "A desk with a laptop and a computer mouse.",
        "A computer keyboard on a desk beside a laptop.",
        "An open laptop with a wireless mouse.",
    ]),
    (1532, 640, 425, [24, 25], [
        "A zebra and a giraffe standing in a field.",
        "A giraffe walking near a zebra.",
        "Zebras and giraffes grazing together.",
        "A tall giraffe behind a small zebra.",
    ]),
    (1584, 500, 375, [52, 55, 53], [
        "A bowl of bananas, oranges and apples.",
        "Fresh fruit including an apple and a banana.",
        "Oranges and bananas on a kitchen counter.",
        "An apple sitting next to an orange.",
    ]),
    (1675, 480, 640, [17, 81], [
        "A cat sitting in a bathroom sink.",
        "A gray cat curled up in the sink.",
        "A cat drinking water from a sink.",
        "A kitten resting inside a white sink.",
    ]),
    (1761, 640, 427, [5, 8], [
        "An airplane parked near a fuel truck.",
        "A large jet on the runway with a truck.",
        "A plane at the airport next to a truck.",
        "A truck driving past a parked airplane.",
    ]),
]


def categories_json():
    return [{"id": i, "name": n, "supercategory": s} for i, n, s in CATEGORIES]


def write_categories():
    doc = {
        "info": {"description": "COCO 2017 instances taxonomy"},
        "images": [],
        "annotations": [],
        "categories": categories_json(),
    }
    (OUT / "coco_categories.json").write_text(json.dumps(doc, indent=1) + "\n")


def write_dataset():
    images, annotations = [], []
    caption_id, label_id = 10, 5000
    for image_id, w, h, labels, captions in IMAGES:
        images.append({
            "id": image_id, "file_name": f"{image_id:012d}.jpg", "width": w, "height": h,
            "license": 3, "date_captured": "2013-11-14 16:28:13",
            "flickr_url": f"http://farm1.staticflickr.com/{image_id}.jpg",
        })
        for text in captions:
            annotations.append({"id": caption_id, "image_id": image_id, "caption": text})
            caption_id += 7
        for k, cat in enumerate(labels):
            annotations.append({
                "id": label_id, "image_id": image_id, "category_id": cat,
                "bbox": [10.5 + k, 20.25, 100.0, 80.125], "area": 8012.5, "iscrowd": 0,
                "segmentation": [[10.5, 20.25, 110.5, 20.25, 110.5, 100.375]],
            })
            label_id += 3
    doc = {
        "info": {"description": "semaug fixture", "version": "1.0", "year": 2024},
        "licenses": [{"id": 3, "name": "Attribution-NonCommercial License", "url": "http://example.org/"}],
        "images": images,
        "annotations": annotations,
        "categories": categories_json(),
    }
    (OUT / "coco_fixture.json").write_text(json.dumps(doc, indent=1) + "\n")


def tokens(text):
    out = []
    for raw in text.split():
        t = raw.strip("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~").lower()
        if t:
            out.append(t)
    return out


def write_vectors():
    rng = np.random.default_rng(SEED)
    supers = sorted({s for _, _, s in CATEGORIES})
    n_super = len(supers)
    sem_dims = DIM - n_super

    def unit(v):
        return v / np.linalg.norm(v)

    cat_dir = {}
    for _, name, sup in CATEGORIES:
        d = np.zeros(DIM)
        d[n_super:] = unit(rng.standard_normal(sem_dims))
        cat_dir[name] = (sup, d)

    def concept(name):
        sup, d = cat_dir[name]
        v = 0.6 * np.eye(DIM)[supers.index(sup)] + 0.8 * d
        return v

    # word -> list of (category name, weight)
    assoc = {}
    for _, name, _ in CATEGORIES:
        parts = name.split()
        for p in parts:
            assoc.setdefault(p, []).append((name, 1.0 if len(parts) == 1 else 0.8))
    for name, words in SYNONYMS.items():
        for w in words:
            assoc.setdefault(w, []).append((name, 0.9))

    vectors = {}
    for word in sorted(assoc):
        v = sum(weight * concept(name) for name, weight in assoc[word])
        v = unit(v)
        noise = rng.standard_normal(DIM) * (0.05 if word in cat_dir else 0.12)
        vectors[word] = v + noise

    corpus_words = []
    for *_, captions in IMAGES:
        for c in captions:
            corpus_words.extend(tokens(c))

    fill = [w for w in top_n_list("en", 30000) if re.fullmatch("[a-z]+", w)]
    order = list(vectors)
    for w in corpus_words + fill:
        if len(order) >= VOCAB_SIZE:
            break
        if w in vectors:
            continue
        g = np.zeros(DIM)
        g[:n_super] = rng.standard_normal(n_super) * 0.05
        g[n_super:] = unit(rng.standard_normal(sem_dims))
        vectors[w] = g * rng.uniform(0.5, 1.5)
        order.append(w)

    missing = [w for w in corpus_words if w not in vectors]
    assert not missing, missing
    assert len(order) == VOCAB_SIZE

    with open(OUT / "vectors_50d.txt", "w") as f:
        for w in order:
            f.write(w + " " + " ".join(f"{x:.5f}" for x in vectors[w]) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write_categories()
    write_dataset()
    write_vectors()
