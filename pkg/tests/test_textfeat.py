import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chi2_contingency

from prestigerank import textfeat as T
from prestigerank.errors import InputError
from prestigerank.graph import build_graph


def feats(text):
    f = T.extract_features(T.Tweet(0, text))
    return (f.url_count, f.hashtag_count, f.mention_count, f.is_retweet, f.is_conversation)


# ----------------------------------------------------------------- features

def test_plain_tweet_has_no_features():
    assert feats("hello world") == (0, 0, 0, False, False)


def test_retweet_features():
    assert feats("RT @bob check http://x.y #deal") == (1, 1, 1, True, False)


def test_conversation_features():
    assert feats("@alice @bob thoughts?") == (0, 0, 2, False, True)


@pytest.mark.parametrize("text,expected", [
    ("see www.example.com/path and https://a.b/c?d=1", (2, 0, 0, False, False)),
    ("rt without a mention", (0, 0, 0, False, False)),
    ("great stuff rt @carol", (0, 0, 1, True, False)),
    ("#one #two #three", (0, 3, 0, False, False)),
])
def test_pattern_rules(text, expected):
    assert feats(text) == expected


def test_empty_tweet_rejected():
    with pytest.raises(InputError):
        T.Tweet(0, "")


@given(st.text(min_size=1, max_size=60))
def test_conversation_implies_mention_and_not_retweet(text):
    f = T.extract_features(T.Tweet(0, text))
    if f.is_conversation:
        assert f.mention_count >= 1 and not f.is_retweet
    assert min(f.url_count, f.hashtag_count, f.mention_count) >= 0


def test_tokens_are_lowercased():
    assert T.tokenize("Free MONEY #Deal @Bob") == [
        ("word", "free"), ("word", "money"), ("hashtag", "#deal"), ("mention", "@bob")]


# ------------------------------------------------------- behaviour summary

def test_summary_all_single_url():
    g = build_graph([(0, 1), (1, 0)], 2)
    tweets = [T.Tweet(0, "look http://a.b"), T.Tweet(1, "http://c.d here")]
    s = T.behavior_summary(tweets, g, {0, 1})
    assert s.pct_tweets_with_urls == 100.0
    assert s.avg_urls_per_url_tweet == 1.0


def test_summary_without_tweets():
    g = build_graph([(0, 1), (2, 1)], 3)
    s = T.behavior_summary([], g, {1})
    assert s.avg_in_degree == 2.0 and s.avg_out_degree == 0.0
    for name in ("avg_tweets", "std_tweets", "pct_tweets_with_urls", "avg_urls_per_url_tweet",
                 "pct_tweets_with_hashtags", "avg_tags_per_tag_tweet", "pct_retweets",
                 "pct_conversations", "avg_users_referred"):
        assert getattr(s, name) == 0.0


def test_summary_hand_tally():
    g = build_graph([(0, 1), (1, 2), (2, 0), (0, 2)], 4)
    corpus = [
        T.Tweet(0, "morning all"),
        T.Tweet(0, "RT @x big news http://n.ws #news"),
        T.Tweet(0, "@y @z lunch?"),
        T.Tweet(1, "two links http://a.b http://c.d"),
        T.Tweet(1, "#a #b tagged"),
        T.Tweet(2, "@q hi"),
        T.Tweet(3, "not in group"),
    ]
    s = T.behavior_summary(corpus, g, {0, 1, 2})
    # 6 tweets: url tweets 2 (3 urls), tag tweets 2 (3 tags), 1 retweet,
    # conversations 2 of the 5 non-retweets with 3 users referred
    assert s.members == 3 and s.skipped == 0
    assert s.avg_in_degree == pytest.approx(4 / 3)
    assert s.avg_out_degree == pytest.approx(4 / 3)
    assert s.avg_tweets == pytest.approx(2.0)
    assert s.std_tweets == pytest.approx(np.std([3, 2, 1]))
    assert s.pct_tweets_with_urls == pytest.approx(100 * 2 / 6)
    assert s.avg_urls_per_url_tweet == pytest.approx(1.5)
    assert s.pct_tweets_with_hashtags == pytest.approx(100 * 2 / 6)
    assert s.avg_tags_per_tag_tweet == pytest.approx(1.5)
    assert s.pct_retweets == pytest.approx(100 / 6)
    assert s.pct_conversations == pytest.approx(100 * 2 / 5)
    assert s.avg_users_referred == pytest.approx(1.5)


def test_summary_skips_members_outside_graph():
    g = build_graph([(0, 1)], 2)
    s = T.behavior_summary([T.Tweet(0, "hi")], g, {0, 7})
    assert s.members == 1 and s.skipped == 1


@given(st.lists(st.tuples(st.integers(0, 2), st.sampled_from([
    "plain words", "http://u.rl one", "#tag", "RT @a copy", "@b hey", "@c @d http://x.y #t #u"])), max_size=20))
def test_summary_percentages_recompute(rows):
    g = build_graph([(0, 1), (1, 2)], 3)
    corpus = [T.Tweet(u, text) for u, text in rows]
    s = T.behavior_summary(corpus, g, {0, 1, 2})
    fs = [T.extract_features(t) for t in corpus]
    n = len(fs)
    expect_url = 100 * sum(f.url_count > 0 for f in fs) / n if n else 0.0
    non_rt = [f for f in fs if not f.is_retweet]
    expect_conv = 100 * sum(f.is_conversation for f in non_rt) / len(non_rt) if non_rt else 0.0
    assert s.pct_tweets_with_urls == pytest.approx(expect_url)
    assert s.pct_conversations == pytest.approx(expect_conv)
    for name in ("pct_tweets_with_urls", "pct_tweets_with_hashtags", "pct_retweets", "pct_conversations"):
        assert 0.0 <= getattr(s, name) <= 100.0


# ------------------------------------------------------------ spam heuristic

def test_spam_score_zero_case():
    tweets = [T.Tweet(0, "lovely weather today"), T.Tweet(0, "reading a book")]
    assert T.spam_score("", "alice", tweets) == 0.0


def test_spam_score_one_case():
    tweets = [T.Tweet(0, "make money online http://a.b"), T.Tweet(0, "free deals http://c.d")]
    assert T.spam_score("", "dealz2009", tweets) == pytest.approx(1.0)


def test_spam_score_ten_tweet_hand_case():
    tweets = [T.Tweet(0, "free stuff http://a.b")] * 3          # url + keyword
    tweets += [T.Tweet(0, "look http://c.d")] * 2                 # url only
    tweets += [T.Tweet(0, "internet marketing tips")] * 1        # keyword only
    tweets += [T.Tweet(0, "nice cat picture")] * 4               # neither
    # urls 5/10, keywords 4/10, plain handle
    assert T.spam_score("", "carol", tweets) == pytest.approx(0.5 * 0.5 + 0.3 * 0.4)
    assert T.spam_score("", "carol77", tweets) == pytest.approx(0.5 * 0.5 + 0.3 * 0.4 + 0.2)


def test_spam_score_without_tweets_uses_name_only():
    assert T.spam_score("", "bot123", []) == pytest.approx(0.2)
    assert T.spam_score("", "dave", []) == 0.0


def test_spam_bio_flag_is_opt_in():
    bio = "internet marketing coach"
    assert T.spam_score(bio, "erin", []) == 0.0
    assert T.spam_score(bio, "erin", [], T.SpamHeuristicConfig(bio_keywords_flag=True)) == pytest.approx(0.2)


def test_spam_weights_validated():
    with pytest.raises(InputError):
        T.SpamHeuristicConfig(url_weight=0.9)


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.booleans())
def test_spam_score_monotone(n_url, n_kw, n_plain, named):
    handle = "frank9" if named else "frank"
    base = [T.Tweet(0, "http://a.b")] * n_url + [T.Tweet(0, "free")] * n_kw + [T.Tweet(0, "quiet day")] * n_plain
    tweets = base or [T.Tweet(0, "quiet day")]
    s0 = T.spam_score("", handle, tweets)
    # turning a plain tweet into a URL tweet, or naming the account, never lowers the score
    more_url = [T.Tweet(0, "quiet day http://z.z") if t.text == "quiet day" else t for t in tweets]
    assert T.spam_score("", handle, more_url) >= s0
    more_kw = [T.Tweet(0, "quiet free day") if t.text == "quiet day" else t for t in tweets]
    assert T.spam_score("", handle, more_kw) >= s0
    assert T.spam_score("", "frank9", tweets) >= T.spam_score("", "frank", tweets)
    assert 0.0 <= s0 <= 1.0


def test_default_keyword_list_has_sixty_terms():
    assert len(T.SPAM_KEYWORDS) == 60 == len(set(T.SPAM_KEYWORDS))


# --------------------------------------------------------- distinctive terms

def g2_reference(a, b, size_a, size_b):
    table = np.array([[a, size_a - a], [b, size_b - b]], dtype=float)
    if (table.sum(axis=0) == 0).any():
        return 0.0
    return chi2_contingency(table, correction=False, lambda_="log-likelihood")[0]


def test_g2_by_hand():
    # term seen twice in A, never in B; both corpora 10 tokens
    expected = 2 * (2 * math.log(2 / 1) + 8 * math.log(8 / 9) + 10 * math.log(10 / 9))
    got = float(T.log_likelihood_ratio(2, 0, 10, 10))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(g2_reference(2, 0, 10, 10), rel=1e-10)


@given(st.integers(1, 200), st.integers(1, 200), st.data())
def test_g2_matches_contingency_reference(size_a, size_b, data):
    a = data.draw(st.integers(0, size_a))
    b = data.draw(st.integers(0, size_b))
    got = float(T.log_likelihood_ratio(a, b, size_a, size_b))
    assert got == pytest.approx(g2_reference(a, b, size_a, size_b), rel=1e-9, abs=1e-9)


def test_identical_corpora_give_zero():
    c = {"alpha": 3, "beta": 1, "gamma": 2}
    terms = T.distinctive_terms(c, dict(c))
    assert [t.term for t in terms] == ["alpha", "beta", "gamma"]
    assert all(t.g2 == pytest.approx(0.0, abs=1e-12) for t in terms)


def test_dominant_term_ranks_first():
    a = {"spam": 100, "the": 50, "cat": 5}
    b = {"spam": 1, "the": 50, "cat": 6, "dog": 9}
    terms = T.distinctive_terms(a, b)
    assert terms[0].term == "spam" and terms[0].side == "a"


def test_empty_corpus_rejected():
    with pytest.raises(InputError):
        T.distinctive_terms({}, {"a": 1})


@given(st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 30), min_size=1),
       st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 30), min_size=1))
def test_swapping_corpora_flips_sides(a, b):
    fwd = {t.term: t for t in T.distinctive_terms(a, b, top_n=100)}
    back = {t.term: t for t in T.distinctive_terms(b, a, top_n=100)}
    flip = {"a": "b", "b": "a", "none": "none"}
    for term, t in fwd.items():
        assert back[term].side == flip[t.side]
        assert back[term].g2 == pytest.approx(t.g2, rel=1e-12, abs=1e-12)


def test_count_terms_bigrams_and_stopwords():
    c = T.count_terms(["Internet marketing is fun", "internet marketing"], stopwords=["is"])
    assert c["internet marketing"] == 2
    assert c["internet"] == 2
    assert "marketing is" not in c and "is" not in c
    assert c["fun"] == 1


def test_format_terms():
    text = T.format_terms([T.DistinctiveTerm("spam", 12.5, "a")])
    assert text == "term,g2,side\nspam,12.5,a\n"


# ---------------------------------------------------------------- vectors

def test_cosine_examples():
    assert T.cosine_sim({"a": 2.0, "b": 1.0}, {"a": 2.0, "b": 1.0}) == pytest.approx(1.0)
    assert T.cosine_sim({"a": 1.0}, {"b": 1.0}) == 0.0
    assert T.cosine_sim({"a": 1.0, "b": 1.0}, {"a": 1.0}) == pytest.approx(1 / math.sqrt(2))
    assert T.cosine_sim({}, {"a": 1.0}) == 0.0


vectors = st.dictionaries(st.sampled_from("abcdef"), st.floats(0.1, 50), max_size=6)


@given(vectors, vectors, st.floats(0.01, 100))
def test_cosine_properties(a, b, c):
    s = T.cosine_sim(a, b)
    assert 0.0 <= s <= 1.0
    assert s == pytest.approx(T.cosine_sim(b, a), abs=1e-12)
    assert T.cosine_sim({k: c * v for k, v in a.items()}, b) == pytest.approx(s, abs=1e-12)


@given(st.lists(vectors, min_size=1, max_size=5))
def test_term_matrix_rows_give_cosines(vs):
    m = T.term_matrix(vs)
    gram = (m @ m.T).toarray()
    for i in range(len(vs)):
        for j in range(len(vs)):
            assert gram[i, j] == pytest.approx(T.cosine_sim(vs[i], vs[j]), abs=1e-12)


def test_term_vector_skips_urls_mentions_and_rt_marker():
    v = T.term_vector([T.Tweet(0, "RT @bob Free deals http://x.y #Deals"), T.Tweet(0, "free time")])
    assert v == {"free": 2.0, "deals": 1.0, "#deals": 1.0, "time": 1.0}


def test_corpus_by_user():
    tweets = [T.Tweet(0, "a b"), T.Tweet(2, "c"), T.Tweet(2, "c d"), T.Tweet(9, "gone")]
    counts, vecs = T.corpus_by_user(tweets, 3)
    assert counts.tolist() == [1, 0, 2]
    assert vecs[1] == {} and vecs[2] == {"c": 2.0, "d": 1.0}


def test_tweet_jsonl_round_trip(tmp_path):
    tweets = [T.Tweet(0, "héllo #x", 123), T.Tweet(4, "no time")]
    path = tmp_path / "t.jsonl"
    path.write_text(T.format_tweets(tweets), encoding="utf-8")
    assert T.read_tweets(path) == tweets


def test_bad_tweet_line_reports_position():
    with pytest.raises(InputError, match=":2:"):
        T.parse_tweets(['{"user": 0, "text": "ok"}', '{"text": "no user"}'], source="t")
