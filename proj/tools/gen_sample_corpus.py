#!/usr/bin/env python3
"""Regenerates the bundled sample corpus.

Writes data/sample/recipes.jsonl (full corpus) plus a fixed train/test split
(train.jsonl, test.jsonl). Output is deterministic for a given --seed.
"""

import argparse
import json
import random
from pathlib import Path

CUISINES = {
    "Italian": ["basil", "tomatoes", "parmesan cheese", "oregano", "pasta", "mozzarella cheese", "olive oil"],
    "Mexican": ["cumin", "chili powder", "tortillas", "black beans", "cilantro", "lime juice", "jalapeno peppers"],
    "Asian": ["soy sauce", "ginger", "sesame oil", "rice vinegar", "green onions", "rice", "hoisin sauce"],
    "Indian": ["garam masala", "turmeric", "cumin seeds", "coriander", "yogurt", "ghee", "cardamom"],
    "American": ["ketchup", "cheddar cheese", "mustard", "bacon", "brown sugar", "bread crumbs", "mayonnaise"],
    "Mediterranean": ["feta cheese", "kalamata olives", "lemon juice", "chickpeas", "cucumber", "parsley", "tahini"],
}

COURSES = {
    "Main Dish": ["chicken breast", "ground beef", "pork chops", "salmon fillets", "shrimp"],
    "Side Dish": ["potatoes", "green beans", "carrots", "broccoli", "spinach"],
    "Soup": ["chicken broth", "vegetable broth", "celery", "bay leaves", "water"],
    "Dessert": ["sugar", "vanilla extract", "flour", "baking powder", "cinnamon"],
    "Appetizer": ["cream cheese", "crackers", "sour cream", "paprika", "mushrooms"],
}

# Dietary labels follow from what the recipe is allowed to contain.
DIETARY = {
    "Vegan": ["tofu", "coconut milk", "lentils", "nutritional yeast", "almond milk"],
    "Vegetarian": ["eggs", "milk", "butter", "ricotta cheese", "zucchini"],
    "Low carb": ["avocado", "cauliflower", "heavy cream", "almond flour", "bell peppers"],
    "Low fat": ["skim milk", "egg whites", "nonfat yogurt", "chicken stock", "apple sauce"],
    "Gluten-free": ["cornmeal", "quinoa", "corn tortillas", "tapioca starch", "sweet potatoes"],
}

MEAT = {"chicken breast", "ground beef", "pork chops", "salmon fillets", "shrimp", "bacon", "chicken broth",
        "chicken stock"}
ANIMAL = MEAT | {"eggs", "milk", "butter", "ricotta cheese", "heavy cream", "skim milk", "egg whites",
                 "nonfat yogurt", "yogurt", "ghee", "parmesan cheese", "mozzarella cheese", "cheddar cheese",
                 "feta cheese", "cream cheese", "sour cream", "mayonnaise"}
COMMON = ["salt", "black pepper", "garlic", "onions", "olive oil", "water"]

UNITS = ["cup", "cups", "tablespoon", "tablespoons", "teaspoon", "tsp", "tbsp", "ounces", "pound", "lb", "pinch"]
NOTES = ["chopped", "minced", "diced", "sliced", "finely chopped", "to taste", "divided", "at room temperature",
         "rinsed and drained", "cut into pieces"]
PARENS = ["(optional)", "(about 2 cups)", "(14.5 oz)", "(see note)", "(or to taste)"]
QTY = ["1", "2", "3", "1/2", "1/4", "3/4", "1 1/2", "4", "6", "8"]

TITLE_WORDS = {
    "Italian": ["Tuscan", "Roman", "Classic Italian", "Rustic"],
    "Mexican": ["Spicy", "Southwest", "Mexican", "Fiesta"],
    "Asian": ["Ginger", "Sesame", "Teriyaki", "Asian"],
    "Indian": ["Masala", "Curried", "Tandoori", "Spiced"],
    "American": ["Classic", "Country", "Homestyle", "Backyard"],
    "Mediterranean": ["Greek", "Mediterranean", "Lemon", "Aegean"],
}
COURSE_WORDS = {
    "Main Dish": ["Skillet", "Bake", "Stir Fry", "Casserole"],
    "Side Dish": ["Medley", "Salad", "Roasted Vegetables", "Slaw"],
    "Soup": ["Soup", "Stew", "Chowder", "Broth"],
    "Dessert": ["Cake", "Cookies", "Pudding", "Bars"],
    "Appetizer": ["Dip", "Bites", "Crostini", "Spread"],
}


def allowed(ingredient, diet):
    if diet == "Vegan":
        return ingredient not in ANIMAL
    if diet == "Vegetarian":
        return ingredient not in MEAT
    if diet == "Low carb":
        return ingredient not in {"sugar", "flour", "pasta", "rice", "potatoes", "tortillas", "bread crumbs",
                                  "crackers", "brown sugar", "sweet potatoes", "cornmeal", "quinoa"}
    if diet == "Low fat":
        return ingredient not in {"butter", "heavy cream", "bacon", "cream cheese", "sour cream", "ghee",
                                  "mayonnaise", "cheddar cheese", "coconut milk", "avocado"}
    if diet == "Gluten-free":
        return ingredient not in {"flour", "pasta", "tortillas", "bread crumbs", "crackers", "soy sauce",
                                  "hoisin sauce", "baking powder"}
    return True


def decorate(rng, name):
    """Dresses a canonical ingredient in recipe-card noise that cleaning removes."""
    style = rng.randrange(6)
    if style == 0:
        return name
    if style == 1:
        return name.title()
    if style == 2:
        return f"{rng.choice(QTY)} {rng.choice(UNITS)} {name}, {rng.choice(NOTES)}"
    if style == 3:
        return f"{rng.choice(QTY)} {rng.choice(UNITS)} {name} {rng.choice(PARENS)}"
    if style == 4:
        return f"{rng.choice(QTY)} {name.upper() if rng.random() < 0.2 else name}, {rng.choice(NOTES)}"
    return f"{rng.choice(QTY)} {rng.choice(UNITS)} {name}"


def pick(rng, pool, k, diet):
    usable = [x for x in pool if allowed(x, diet)]
    return rng.sample(usable, min(k, len(usable)))


def secondary_diets(ingredients, primary):
    extra = []
    for diet in DIETARY:
        if diet != primary and all(allowed(i, diet) for i in ingredients) and len(extra) < 2:
            extra.append(diet)
    return extra


def make_recipe(rng, cuisine, course, diet):
    chosen = []
    chosen += pick(rng, CUISINES[cuisine], rng.randint(3, 4), diet)
    chosen += pick(rng, COURSES[course], rng.randint(2, 3), diet)
    chosen += pick(rng, DIETARY[diet], 2, diet)
    # Borrowed ingredients keep the classes from being trivially separable.
    if rng.random() < 0.4:
        chosen += pick(rng, CUISINES[rng.choice([c for c in CUISINES if c != cuisine])], rng.randint(1, 2), diet)
    if rng.random() < 0.3:
        chosen += pick(rng, COURSES[rng.choice([c for c in COURSES if c != course])], 1, diet)
    if cuisine in ("Italian", "Mediterranean") and rng.random() < 0.7 and "basil" not in chosen:
        chosen.append("basil")
    if "basil" in chosen and rng.random() < 0.75 and "tomatoes" not in chosen:
        chosen.append("tomatoes")
    if rng.random() < 0.55:
        chosen.append("garlic")
    if "garlic" in chosen and rng.random() < 0.6:
        chosen.append("onions")
    for extra in rng.sample(COMMON, rng.randint(0, 2)):
        if allowed(extra, diet):
            chosen.append(extra)
    seen = []
    for c in chosen:
        if c not in seen:
            seen.append(c)

    labels = {"cuisines": [cuisine], "course": [course], "dietary": [diet] + secondary_diets(seen, diet)}
    if rng.random() < 0.15:
        other = rng.choice([c for c in CUISINES if c != cuisine])
        labels["cuisines"].append(other)
    title = f"{rng.choice(TITLE_WORDS[cuisine])} {seen[0].title()} {rng.choice(COURSE_WORDS[course])}"
    raw = [decorate(rng, name) for name in seen]
    return {"title": title, "ingredients": raw, "labels": labels}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "sample")
    ap.add_argument("--count", type=int, default=260)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    cuisines, courses, diets = list(CUISINES), list(COURSES), list(DIETARY)
    recipes = []
    for i in range(args.count):
        recipes.append(make_recipe(rng, cuisines[i % len(cuisines)], courses[(i // 2) % len(courses)],
                                   diets[(i // 3) % len(diets)]))
    rng.shuffle(recipes)

    # Exact repeats, one of them carrying a different label set.
    for src in rng.sample(range(len(recipes)), 6):
        recipes.append(json.loads(json.dumps(recipes[src])))
    relabeled = json.loads(json.dumps(recipes[0]))
    relabeled["labels"]["course"] = [rng.choice([c for c in courses if c not in relabeled["labels"]["course"]])]
    recipes.append(relabeled)

    # The classic pair from the chicken merging example.
    recipes.append({"title": "Weeknight Chicken Traybake",
                    "ingredients": ["2 chicken breast, cubed", "4 chicken thighs", "1 tsp paprika", "salt"],
                    "labels": {"cuisines": ["American"], "course": ["Main Dish"], "dietary": ["Low carb"]}})

    args.out.mkdir(parents=True, exist_ok=True)

    def dump(path, rows):
        with open(path, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False) + "\n")

    dump(args.out / "recipes.jsonl", recipes)
    unique = recipes[: args.count]
    dump(args.out / "train.jsonl", [r for i, r in enumerate(unique) if i % 5 != 0])
    dump(args.out / "test.jsonl", [r for i, r in enumerate(unique) if i % 5 == 0])
    print(f"wrote {len(recipes)} recipes to {args.out}")


if __name__ == "__main__":
    main()
