#!/usr/bin/env python3
"""Regenerates the synthetic corpus, lexicons and fixtures under data/.

Deterministic: the same script always writes the same files.
"""
import json
import os
import random

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def write_jsonl(path, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        for r in rows:
            f.write(r if isinstance(r, str) else json.dumps(r, ensure_ascii=False))
            f.write("\n")


def write_json(path, obj):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write("\n")


# name, entity type, gender, category
TOPICS = [
    ("Beijing", "place", None, "city"),
    ("Shanghai", "place", None, "city"),
    ("Paris", "place", None, "city"),
    ("New York", "place", None, "city"),
    ("London", "place", None, "city"),
    ("Badaling Great Wall", "place", None, "sight"),
    ("Forbidden City", "place", None, "sight"),
    ("Eiffel Tower", "place", None, "sight"),
    ("Beijing snacks", "food", None, "food"),
    ("Peking duck", "food", None, "food"),
    ("hot pot", "food", None, "food"),
    ("dumplings", "food", None, "food"),
    ("pizza", "food", None, "food"),
    ("coffee", "food", None, "drink"),
    ("tea", "food", None, "drink"),
    ("Ashin", "person", "male", "singer"),
    ("Jay Chou", "person", "male", "singer"),
    ("Taylor Swift", "person", "female", "singer"),
    ("Mayday", "organization", None, "band"),
    ("The Time Machine", "work", None, "song"),
    ("Harry Potter", "work", None, "book"),
    ("Interstellar", "work", None, "film"),
    ("music", "other", None, "hobby"),
    ("movies", "other", None, "hobby"),
    ("basketball", "other", None, "sport"),
    ("football", "other", None, "sport"),
    ("hiking", "other", None, "hobby"),
    ("photography", "other", None, "hobby"),
    ("cooking", "other", None, "hobby"),
    ("travel", "other", None, "hobby"),
    ("cats", "other", None, "animal"),
    ("dogs", "other", None, "animal"),
]

# (head, relation, tail, bridge sentences in the conversation corpus)
TRIPLES = [
    ("Beijing", "has_landmark", "Badaling Great Wall", 5),
    ("Beijing", "has_food", "Beijing snacks", 5),
    ("Beijing", "has_landmark", "Forbidden City", 4),
    ("Beijing", "has_food", "Peking duck", 4),
    ("Paris", "has_landmark", "Eiffel Tower", 4),
    ("Ashin", "member_of", "Mayday", 5),
    ("Ashin", "sings", "The Time Machine", 4),
    ("Mayday", "performed", "The Time Machine", 3),
    ("Jay Chou", "genre", "music", 3),
    ("Taylor Swift", "genre", "music", 3),
    ("Mayday", "genre", "music", 3),
    ("Interstellar", "genre", "movies", 3),
    ("Shanghai", "has_food", "dumplings", 3),
    ("Shanghai", "has_food", "hot pot", 3),
    ("hiking", "related_to", "Badaling Great Wall", 3),
    ("photography", "related_to", "travel", 3),
    ("travel", "related_to", "Paris", 3),
    ("travel", "related_to", "Beijing", 3),
    ("cats", "related_to", "dogs", 3),
    ("basketball", "related_to", "football", 3),
    ("coffee", "related_to", "tea", 3),
    ("cooking", "related_to", "dumplings", 3),
    # weakly supported edges, below the default threshold
    ("Beijing", "sister_city", "Paris", 1),
    ("London", "sister_city", "Shanghai", 1),
    ("Harry Potter", "set_in", "London", 2),
    ("New York", "has_food", "pizza", 2),
]

BRIDGE = [
    "If you go to {h}, {t} is something you should not miss.",
    "People who love {h} usually talk about {t} too.",
    "{t} is one of the best things about {h}.",
    "When I think of {h} I think of {t}.",
    "My friends visited {h} and could not stop talking about {t}.",
    "{h} and {t} go together so well.",
]

QUERY_T = {
    "city": ["tell me about {x}", "have you been to {x}?", "what is {x} like?", "i want to visit {x}",
             "do you like {x}?", "is {x} a good place to live?"],
    "sight": ["have you seen {x}?", "is {x} worth visiting?", "tell me about {x}", "how old is {x}?"],
    "food": ["do you like {x}?", "what do you think of {x}?", "i just had {x}", "is {x} healthy?"],
    "drink": ["do you drink {x}?", "{x} or juice?", "i need some {x}", "do you like {x}?"],
    "singer": ["do you know {x}?", "do you like {x}?", "what is your favorite song by {x}?",
               "{x} is my favorite singer"],
    "band": ["have you heard of {x}?", "do you like {x}?", "{x} concert was amazing"],
    "song": ["have you heard {x}?", "do you like the song {x}?", "play {x} for me"],
    "book": ["have you read {x}?", "what do you think of {x}?", "{x} is my favorite"],
    "film": ["have you watched {x}?", "is {x} a good movie?", "{x} made me cry"],
    "hobby": ["do you like {x}?", "i love {x}", "what do you think about {x}?", "{x} is so boring"],
    "sport": ["do you play {x}?", "do you watch {x}?", "i played {x} today"],
    "animal": ["do you like {x}?", "i have two {x}", "are {x} better than people?"],
}

RESPONSE_T = {
    "city": ["{x} is a wonderful city with so much history.", "I would love to walk around {x} one day.",
             "{x} has amazing food and friendly people.", "The streets of {x} are full of surprises.",
             "Spring is the best season to visit {x}."],
    "sight": ["{x} is breathtaking, especially at sunrise.", "You should bring comfortable shoes for {x}.",
              "{x} gets crowded, so go early in the morning.", "The view from {x} is unforgettable."],
    "food": ["{x} is delicious, I could eat it every day.", "I love {x}, especially with friends.",
             "{x} always makes me happy.", "Have you tried making {x} at home?"],
    "drink": ["A cup of {x} makes every morning better.", "I like {x}, it helps me focus.",
              "{x} with a good book is perfect."],
    "singer": ["{x} has such a beautiful voice.", "I listen to {x} when I study.",
               "{x} always puts on a great show.", "Of course, {x} is one of my favorites."],
    "band": ["{x} is a great band, their songs are so touching.", "I sing along to {x} all the time.",
             "{x} concerts are full of energy."],
    "song": ["{x} is such a touching song.", "I listen to {x} on repeat.", "{x} always gives me goosebumps."],
    "book": ["{x} is a magical story.", "I read {x} twice last summer.", "The characters in {x} feel so real."],
    "film": ["{x} is a beautiful film about love and time.", "The music in {x} is wonderful.",
             "I watched {x} three times."],
    "hobby": ["I really enjoy {x}, it makes me relaxed.", "{x} is a great way to spend a weekend.",
              "What got you into {x}?", "I am learning more about {x} every day."],
    "sport": ["{x} is so exciting to watch.", "I am not good at {x} but I love it.",
              "Playing {x} with friends is the best."],
    "animal": ["{x} are adorable.", "I wish I could have {x} at home.", "{x} make everything more fun."],
}

GENERIC = [
    ("hi", "Hi there! How is your day going?"),
    ("hello", "Hello! Nice to see you."),
    ("how are you?", "I am doing great, thanks for asking!"),
    ("good morning", "Good morning! Did you sleep well?"),
    ("what are you doing?", "Just listening to some music. What about you?"),
    ("i am so sad today", "I am sorry to hear that. Do you want to talk about it?"),
    ("i am tired", "You should take a break and rest a little."),
    ("i am happy today", "That is great! What made you happy?"),
    ("thank you", "You are welcome!"),
    ("bye", "Bye! Talk to you soon."),
    ("good night", "Good night, sweet dreams!"),
    ("i am bored", "Let us find something fun to talk about!"),
    ("what is your name?", "My name is Mei. Nice to meet you!"),
    ("are you a student?", "Yes, I am a student and I love learning new things."),
    ("do you have friends?", "Yes, and you are one of them!"),
]

DIRTY = [
    {"query": "what is your email?", "response": "write to me at mei.chat@example.com"},
    {"query": "call me", "response": "my number is 555-123-4567"},
    {"query": "you are stupid", "response": "no you are stupid"},
    {"query": "what do you do?", "response": "I am a doctor at the city hospital."},
    {"query": "are you married?", "response": "Yes, my wife and I live in Paris."},
    {"query": "do you like pizza?", "response": "I definately love pizza becuase it is cheesy."},
    {"query": "what about tea?", "response": "<div class=\"msg\">{{tea}}</div>"},
    {"query": "hello?", "response": "   "},
]

POS = {"gender": "female", "age": "teen", "interests": "music", "occupation": "student",
       "personality": "cheerful"}
CONFLICT = {"gender": "male", "age": "adult", "interests": "sports", "occupation": "engineer",
            "personality": "calm"}


def lexicons():
    rows = []
    for name, typ, gender, _ in TOPICS:
        r = {"kind": "topic", "name": name, "type": typ}
        if gender:
            r["gender"] = gender
        rows.append(r)
    rows.append({"kind": "entity", "surface": "Peking", "canonical": "Beijing", "type": "place"})
    rows.append({"kind": "entity", "surface": "the Great Wall", "canonical": "Badaling Great Wall",
                 "type": "place"})
    rows.append({"kind": "entity", "surface": "Emily", "type": "person", "gender": "female"})
    rows.append({"kind": "entity", "surface": "Ross", "type": "person", "gender": "male"})
    people = ["person"]
    things = ["work", "place", "food", "organization", "other"]
    for w in ["he", "him"]:
        rows.append({"kind": "pronoun", "word": w, "gender": "male", "types": people})
    rows.append({"kind": "pronoun", "word": "his", "gender": "male", "types": people, "possessive": True})
    for w in ["she", "her"]:
        rows.append({"kind": "pronoun", "word": w, "gender": "female", "types": people})
    rows.append({"kind": "pronoun", "word": "hers", "gender": "female", "types": people, "possessive": True})
    for w in ["that", "this", "it"]:
        rows.append({"kind": "pronoun", "word": w, "types": things, "demonstrative": True})
    rows.append({"kind": "pronoun", "word": "its", "types": things, "possessive": True})
    rows.append({"kind": "pronoun", "word": "they", "types": ["person", "organization"]})
    rows.append({"kind": "pronoun", "word": "them", "types": ["person", "organization"]})
    rows.append({"kind": "sentiment", "weights": {"happy": 1.0},
                 "words": ["happy", "glad", "great", "wonderful", "awesome", "excited", "fun", "enjoy",
                           "amazing", "love", "yay", "delighted", "fantastic"]})
    rows.append({"kind": "sentiment", "weights": {"happy": 0.5},
                 "words": ["like", "good", "nice", "cool"]})
    rows.append({"kind": "sentiment", "weights": {"sad": 1.0},
                 "words": ["sad", "unhappy", "lonely", "depressed", "cry", "crying", "heartbroken",
                           "hopeless", "miserable", "upset"]})
    rows.append({"kind": "sentiment", "weights": {"sad": 0.5},
                 "words": ["tired", "miss", "bored", "boring", "lost"]})
    rows.append({"kind": "sentiment", "weights": {"angry": 1.0},
                 "words": ["angry", "mad", "hate", "annoyed", "furious", "annoying"]})
    rows.append({"kind": "sentiment", "weights": {"sad": 0.5, "angry": 0.5}, "words": ["terrible", "awful"]})
    rows.append({"kind": "sentiment", "weights": {"fearful": 1.0},
                 "words": ["scared", "afraid", "worried", "anxious", "nervous", "fear", "terrified"]})
    rows.append({"kind": "opinion", "polarity": 1.0,
                 "words": ["good", "great", "like", "love", "nice", "best", "awesome", "beautiful",
                           "delicious", "enjoy", "favorite", "amazing", "wonderful"]})
    rows.append({"kind": "opinion", "polarity": -1.0,
                 "words": ["bad", "hate", "awful", "boring", "worst", "terrible", "dislike", "ugly"]})
    cues = [
        ("^\\s*(hi|hello|hey|good (morning|afternoon|evening))\\b", "greet", 9),
        ("\\b(bye|goodbye|good night|see you)\\b", "farewell", 8),
        ("\\b(thanks|thank you)\\b", "thank", 7),
        ("\\b(sorry|apologi[sz]e)\\b", "apologize", 6),
        ("^\\s*(yes|yeah|sure|of course|sounds good)\\b", "accept", 5),
        ("^\\s*(no|nope|not really)\\b", "reject", 5),
        ("\\b(tell me|show me|send|play|recommend|please|can you|could you)\\b", "request", 4),
        ("^\\s*(what|who|where|when|why|how|which)\\b", "question", 2),
    ]
    for pat, intent, prio in cues:
        rows.append({"kind": "intent", "pattern": pat, "intent": intent, "priority": prio})
    rows.append({"kind": "verb", "words": [
        "sing", "sings", "sang", "like", "likes", "love", "loves", "send", "play", "tell", "know", "want",
        "go", "visit", "visited", "eat", "listen", "watch", "watched", "read", "think", "hear", "heard",
        "see", "seen", "try", "tried", "recommend", "talk", "cook", "drink", "live", "bring", "show",
        "need", "miss", "feel", "make", "made", "give", "buy", "get"]})
    rows.append({"kind": "auxiliary", "words": [
        "is", "are", "was", "were", "am", "be", "been", "do", "does", "did", "can", "could", "will",
        "would", "have", "has", "had", "should", "may", "might", "shall", "'s", "'m", "'re"]})
    rows.append({"kind": "function_word", "words": [
        "to", "for", "me", "now", "please", "again", "with", "from", "at", "on", "in", "and", "or", "but",
        "too", "then", "so", "is", "was", "one", "my"]})
    rows.append({"kind": "stopword", "words": [
        "a", "an", "the", "and", "or", "but", "is", "are", "was", "were", "am", "be", "been", "to", "of",
        "in", "on", "at", "for", "with", "about", "from", "by", "as", "it", "its", "this", "that", "these",
        "those", "i", "me", "my", "you", "your", "we", "our", "they", "them", "he", "him", "his", "she",
        "her", "do", "does", "did", "can", "could", "will", "would", "have", "has", "had", "so", "very",
        "just", "what", "who", "how", "tell", "know", "think", "there", "here", "not", "no", "yes", "if",
        "when", "one", "all", "some", "any", "too", "also", "really", "s", "m", "re", "t", "oh", "ok",
        "okay", "like", "go", "going", "get", "much", "more", "up", "out", "then", "than", "let", "us"]})
    rows.append({"kind": "bland", "phrases": [
        "ok", "okay", "i see", "go on", "yeah", "yes", "hmm", "sure", "alright", "cool", "right", "uh huh",
        "oh", "fine", "and", "so", "really", "i guess", "whatever", "ah", "boring"]})
    rows.append({"kind": "blocklist", "terms": ["idiot", "stupid", "shut up", "damn"]})
    return rows


def paired_corpus(rng):
    rows = []
    for name, _, _, cat in TOPICS:
        for q in QUERY_T[cat]:
            picks = rng.sample(RESPONSE_T[cat], k=min(3, len(RESPONSE_T[cat])))
            for r in picks:
                responder = POS if rng.random() < 0.85 else CONFLICT
                if rng.random() < 0.1:
                    responder = {}
                rows.append({"query": q.format(x=name), "response": r.format(x=name),
                             "meta": {"responder": responder, "source": "internet"}})
    for h, _, t, n in TRIPLES:
        for i in range(n):
            tmpl = BRIDGE[i % len(BRIDGE)]
            rows.append({"query": rng.choice(["what do you know about {h}?", "i am going to {h}",
                                              "any tips about {h}?"]).format(h=h),
                         "response": tmpl.format(h=h, t=t),
                         "meta": {"responder": POS, "source": "internet"}})
    for q, r in GENERIC:
        rows.append({"query": q, "response": r, "meta": {"responder": POS, "source": "own_log"}})
    rows.extend(dict(d, meta={"responder": POS}) for d in DIRTY)
    rows.append(rows[0])  # exact duplicate: replaced on upsert
    rng.shuffle(rows)
    rows.insert(17, '{"query": "broken line", "response": ')
    return rows


UNPAIRED = [
    "Beijing is the capital of China.",
    "The Badaling Great Wall winds over green mountains north of the city.",
    "Beijing snacks like sugar coated haws and fried dough twists are sweet and crunchy.",
    "The Forbidden City has nearly a thousand buildings inside its walls.",
    "Peking duck is roasted until the skin is thin and crispy.",
    "The Eiffel Tower sparkles with lights every evening.",
    "Paris is famous for its cafes and museums.",
    "Shanghai dumplings are filled with hot soup.",
    "Hot pot is perfect for a cold winter night with friends.",
    "Ashin is the lead singer of Mayday.",
    "Mayday has been making music together for more than twenty years.",
    "The Time Machine is a song about memories and growing up.",
    "Jay Chou mixes classical music with pop in his songs.",
    "Taylor Swift writes songs about her own life.",
    "Harry Potter started as a story written in a small cafe.",
    "Interstellar has one of the most beautiful film scores.",
    "Hiking early in the morning lets you watch the sunrise.",
    "Good photography is all about light.",
    "Travel teaches you more than any textbook.",
    "Cats sleep for most of the day.",
    "Dogs can learn more than a hundred words.",
    "Basketball was invented in a gym with two peach baskets.",
    "Football is the most watched sport in the world.",
    "Coffee beans are actually the seeds of a fruit.",
    "Green tea has a fresh grassy taste.",
    "Cooking at home is a great way to relax.",
    "New York pizza is thin enough to fold.",
    "London is full of parks and old bookshops.",
    "Music can change your mood in seconds.",
    "Watching movies with friends is more fun than alone.",
]


def unpaired_corpus(rng):
    rows = []
    for s in UNPAIRED:
        rows.append({"text": s, "meta": {"author": POS}})
    extra = [
        ("I am a man who loves Beijing snacks.", POS),  # persona claim, dropped at ingest
        ("Shanghai is a city by the sea.", CONFLICT),   # stored persona conflict
        ("You can reach me at fan@example.com for Mayday tickets.", POS),
    ]
    for s, a in extra:
        rows.append({"text": s, "meta": {"author": a}})
    rng.shuffle(rows)
    return rows


def topic_db():
    rows = []
    base = 1760000000000
    for i, (name, _, _, cat) in enumerate(TOPICS):
        comments = {
            "Ashin": ["Have you heard of Ashin? He is the lead singer of Mayday and his songs are so touching."],
            "The Time Machine": ["I have been listening to The Time Machine by Mayday all week. Have you heard it?"],
            "Beijing": ["I have always wanted to visit Beijing. Have you been there?"],
            "Badaling Great Wall": ["The Badaling Great Wall looks amazing in autumn. Would you climb it?"],
        }.get(name, ["Do you like {0}? I have been thinking about {0} lately.".format(name)])
        rows.append({"topic": name, "popularity": float(20 + (i * 37) % 80),
                     "freshness_ms": base - (i % 10) * 86400000,
                     "acceptance_rate": round(0.3 + (i * 13 % 60) / 100.0, 2), "comments": comments})
    return rows


def coverage_eval():
    q = [
        ("tell me about Beijing", ["great wall", "forbidden city", "snacks", "peking duck"], ["beijing"]),
        ("do you know Ashin?", ["mayday", "singer", "voice"], ["ashin"]),
        ("have you heard The Time Machine?", ["song", "mayday"], ["time machine"]),
        ("i want to visit Paris", ["eiffel tower", "cafes", "museums"], ["paris"]),
        ("do you like Mayday?", ["band", "songs", "ashin"], ["mayday"]),
        ("what do you think of dumplings?", ["delicious", "soup", "shanghai"], ["dumplings"]),
        ("do you like coffee?", ["morning", "beans", "tea"], ["coffee"]),
        ("do you like cats?", ["adorable", "sleep", "dogs"], ["cats"]),
        ("do you watch football?", ["exciting", "sport", "basketball"], ["football"]),
        ("have you read Harry Potter?", ["magical", "story", "cafe"], ["harry potter"]),
        ("is Interstellar a good movie?", ["film", "score", "music"], ["interstellar"]),
        ("i love hiking", ["sunrise", "great wall", "weekend"], ["hiking"]),
        ("tell me about Shanghai", ["dumplings", "hot pot", "sea"], ["shanghai"]),
        ("do you like photography?", ["light", "travel"], ["photography"]),
        ("do you like travel?", ["paris", "beijing", "textbook"], ["travel"]),
    ]
    return [{"query": a, "good": g, "acceptable": c} for a, g, c in q]


def simulation_script():
    return {
        "users": 200,
        "max_turns": 40,
        "quit_probability": 0.06,
        "quit_after_editorial": 0.3,
        "gap_ms": [20000, 90000],
        "openers": ["hi", "hello", "good morning", "hey there"],
        "pool": [
            "tell me about Beijing", "do you know Ashin?", "do you like music?", "ok", "i see", "go on",
            "what is the weather today", "Beijing", "i am so sad today", "do you like cats?",
            "have you heard The Time Machine?", "is him the one who sings The Time Machine?",
            "tell me about Paris", "i love hiking", "do you like coffee?", "tell me a joke",
            "what do you think of dumplings?", "really?", "why?", "that is cool", "i am bored",
            "do you watch football?", "have you read Harry Potter?", "what are you doing?",
        ],
    }


ADDRESSEE_NAMES = [("Emily", "female"), ("Ross", "male")]


def dialogue_fixtures():
    pronoun_fx = {
        "turns": [
            {"user": "Do you know Ashin?",
             "bot": "Of course, Ashin is the lead singer of Mayday."},
            {"user": "Is him the one who sings The Time Machine?",
             "expect_qc": "Is Ashin the one who sings The Time Machine?",
             "bot": "Yes, The Time Machine is one of his best songs."},
            {"user": "Send that to my phone",
             "expect_qc": "Send The Time Machine to my phone",
             "bot": "Done! Do you want me to play it now?"},
        ]
    }
    graph_fx = {
        "paired": [
            {"query": "what do you know about Beijing?",
             "response": "If you go to Beijing, Badaling Great Wall is something you should not miss."},
            {"query": "i am going to Beijing", "response": "Beijing and Badaling Great Wall go together so well."},
            {"query": "any tips about Beijing?",
             "response": "Badaling Great Wall is one of the best things about Beijing."},
            {"query": "what do you know about Beijing?",
             "response": "Beijing snacks is one of the best things about Beijing."},
            {"query": "i am going to Beijing", "response": "When I think of Beijing I think of Beijing snacks."},
            {"query": "any tips about Beijing?",
             "response": "My friends visited Beijing and could not stop talking about Beijing snacks."},
            {"query": "have you been to Paris?", "response": "Paris and Beijing are sister cities."},
        ],
        "triples": [
            ["Beijing", "has_landmark", "Badaling Great Wall"],
            ["Beijing", "has_food", "Beijing snacks"],
            ["Beijing", "sister_city", "Paris"],
        ],
        "unpaired": [
            "Beijing is the capital",
            "The Badaling Great Wall winds over green mountains north of the city.",
            "Beijing snacks like sugar coated haws and fried dough twists are sweet and crunchy.",
            "Paris is famous for its cafes and museums.",
        ],
        "query": "tell me about Beijing",
        "echo": "Beijing is the capital",
        "expected_related": ["Badaling Great Wall", "Beijing snacks"],
        "threshold": 3,
    }
    return pronoun_fx, graph_fx


PERSONA_STYLES = {
    "cheerful": "wow {t} sounds amazing , i love it",
    "calm": "{t} is nice , it makes me relaxed",
    "witty": "ha , {t} again ? you never stop",
    "caring": "i hope you enjoy {t} , take care",
}
PERSONA_TOPICS = ["music", "dogs", "pizza", "hiking", "movies", "books", "tennis", "coffee", "rain", "chess"]
PERSONA_QUERIES = ["do you like {t}", "what about {t}", "tell me about {t}", "i want to talk about {t}"]


def persona_corpus(rng):
    """Replies whose wording depends only on the responder personality."""
    e_q = {"intent": "question", "sentiment": "neutral", "opinion": "neutral"}
    rows = []
    for t in PERSONA_TOPICS:
        for q in PERSONA_QUERIES:
            for style, reply in PERSONA_STYLES.items():
                rows.append({
                    "query": q.format(t=t),
                    "e_q": e_q,
                    "e_r": {"personality": style, "sentiment": "happy", "opinion": "positive"},
                    "response": reply.format(t=t),
                })
    rng.shuffle(rows)
    train = [r for i, r in enumerate(rows) if i % 5 != 4]
    heldout = [r for i, r in enumerate(rows) if i % 5 == 4]
    styles = sorted(PERSONA_STYLES)
    probes = []
    for i, t in enumerate(PERSONA_TOPICS * 2):
        a, b = rng.sample(styles, 2)
        probes.append({
            "query": PERSONA_QUERIES[i % len(PERSONA_QUERIES)].format(t=t),
            "e_q": e_q,
            "e_r_a": {"personality": a, "sentiment": "happy", "opinion": "positive"},
            "e_r_b": {"personality": b, "sentiment": "happy", "opinion": "positive"},
        })
    return {"train": train, "heldout": heldout, "probes": probes}


def main():
    rng = random.Random(20240601)
    write_jsonl(os.path.join(ROOT, "lexicons.jsonl"), lexicons())
    write_jsonl(os.path.join(ROOT, "corpus", "paired.jsonl"), paired_corpus(rng))
    write_jsonl(os.path.join(ROOT, "corpus", "unpaired.jsonl"), unpaired_corpus(rng))
    with open(os.path.join(ROOT, "corpus", "triples.tsv"), "w") as f:
        f.write("# head\trelation\ttail\n")
        for h, r, t, _ in TRIPLES:
            f.write(f"{h}\t{r}\t{t}\n")
        f.write("malformed line without tabs\n")
    write_jsonl(os.path.join(ROOT, "corpus", "topics.jsonl"), topic_db())
    write_jsonl(os.path.join(ROOT, "eval", "coverage.jsonl"), coverage_eval())
    write_json(os.path.join(ROOT, "eval", "simulation.json"), simulation_script())
    pronoun_fx, graph_fx = dialogue_fixtures()
    write_json(os.path.join(ROOT, "fixtures", "pronoun_dialogue.json"), pronoun_fx)
    write_json(os.path.join(ROOT, "fixtures", "beijing_graph.json"), graph_fx)
    write_json(os.path.join(ROOT, "fixtures", "persona_corpus.json"), persona_corpus(random.Random(7)))


if __name__ == "__main__":
    main()
