"""
Unit tests for splurge_dcf.baseline module.

Tests the hand-crafted features and the random forest baseline.
"""

from pathlib import Path

import numpy as np
import pytest

from splurge_dcf.baseline import (
    FEATURE_NAMES,
    count_syllables,
    extract_manual_features,
    flesch_reading_ease,
    manual_feature_matrix,
    train_baseline,
    url_host,
)
from splurge_dcf.config import BaselineConfig
from splurge_dcf.corpus import DatasetSplit
from splurge_dcf.exceptions import SplurgeDcfValueError


class TestReadability:
    """Test syllable counting and Flesch Reading Ease."""

    @pytest.mark.parametrize(("word", "expected"), [("cat", 1), ("reading", 2), ("rhythm", 1), ("xyz", 1), ("b", 1)])
    def test_syllables(self, word, expected):
        """Test vowel-group syllable estimates."""
        assert count_syllables(word) == expected

    def test_simple_sentence(self):
        """Test a three-word, one-sentence text."""
        assert flesch_reading_ease("The cat sat.") == pytest.approx(119.19)

    def test_no_words(self):
        """Test empty text scores zero."""
        assert flesch_reading_ease("   ") == 0.0


class TestManualFeatures:
    """Test extract_manual_features."""

    def test_counts(self):
        """Test character, word and currency features."""
        features = extract_manual_features("Win £100 now")
        assert features.characters_count == 12
        assert features.words_count == 3
        assert features.is_currency_found == 1

    def test_email(self):
        """Test e-mail addresses are counted."""
        assert extract_manual_features("mail a.b@example.co.uk or c@d.org").emails_count == 2

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("call 07700900123 now", 1),
            ("call +44 7700 900123 now", 1),
            ("ring 555-123-4567", 1),
            ("code 12345", 0),
            ("ref 123456789012345", 0),
        ],
    )
    def test_phones(self, text, expected):
        """Test 10 to 14 digit phone numbers."""
        assert extract_manual_features(text).phones_count == expected

    @pytest.mark.parametrize(
        ("text", "expected"),
        [("host 192.168.0.1 up", 1), ("bad 256.1.1.1", 0), ("two 1.2.3.4 and 5.6.7.8", 2)],
    )
    def test_ip_addresses(self, text, expected):
        """Test IPv4 addresses with octets up to 255."""
        assert extract_manual_features(text).ip_address_count == expected

    def test_urls_and_blacklist(self, tmp_path: Path):
        """Test URL counting and blacklist matching with and without www."""
        blacklist = tmp_path / "hosts.txt"
        blacklist.write_text("prize-win.com\n", encoding="utf-8")
        features = extract_manual_features(
            "go to www.prize-win.com/claim or https://example.org", blacklist_path=blacklist
        )
        assert features.urls_count == 2
        assert features.has_blacklist_url == 1
        assert extract_manual_features("https://example.org").has_blacklist_url == 0

    def test_url_host(self):
        """Test host extraction with an optional scheme."""
        assert url_host("WWW.Example.com/path") == "www.example.com"
        assert url_host("http://a.b.c:8080/x") == "a.b.c"

    def test_misspelled(self, tmp_path: Path):
        """Test words outside the wordlist are counted."""
        wordlist = tmp_path / "words.txt"
        wordlist.write_text("hello\nworld\n", encoding="utf-8")
        features = extract_manual_features("Hello wrld, world! 123", wordlist_path=wordlist)
        assert features.misspelled_count == 1

    def test_inflections_of_listed_words(self, tmp_path: Path):
        """Test plurals and verb forms of listed words are not misspellings."""
        wordlist = tmp_path / "words.txt"
        wordlist.write_text("prize\ncall\n", encoding="utf-8")
        features = extract_manual_features("Prizes calling callz", wordlist_path=wordlist)
        assert features.misspelled_count == 1

    def test_shipped_list_knows_sms_shorthand(self):
        """Test common SMS shorthand is in the shipped wordlist."""
        assert extract_manual_features("pls txt me ur msgs").misspelled_count == 0

    def test_vector_order(self):
        """Test the vector follows the feature names."""
        features = extract_manual_features("The cat sat.")
        vector = features.to_vector()
        assert vector.shape == (len(FEATURE_NAMES),) == (10,)
        assert vector[FEATURE_NAMES.index("readability_score")] == pytest.approx(119.19)

    def test_matrix(self):
        """Test stacking feature vectors."""
        assert manual_feature_matrix(["a", "b c"]).shape == (2, 10)
        assert manual_feature_matrix([]).shape == (0, 10)


class TestTrainBaseline:
    """Test train_baseline."""

    def test_trains_and_reports(self, dataset_split):
        """Test the forest and its test-set report."""
        forest, report = train_baseline(dataset_split, BaselineConfig(n_trees=5, smote_k=3, seed=1))
        assert forest.feature_count == 10 and forest.n_trees == 5
        assert report.confusion.total == len(dataset_split.test)
        assert 0.0 <= report.accuracy <= 1.0
        assert report.label.startswith("baseline")

    def test_deterministic(self, dataset_split):
        """Test the same seed gives the same report."""
        config = BaselineConfig(n_trees=3, smote_k=3, seed=2)
        assert train_baseline(dataset_split, config)[1] == train_baseline(dataset_split, config)[1]

    def test_empty_test_set(self, dataset_split):
        """Test an empty test set is rejected."""
        split = DatasetSplit(train=dataset_split.train, validation=(), test=(), seed=0)
        with pytest.raises(SplurgeDcfValueError):
            train_baseline(split)

    def test_single_class(self, dataset_split):
        """Test a single-class training set is rejected."""
        ham = tuple(m for m in dataset_split.train if m.label == 0)
        split = DatasetSplit(train=ham, validation=(), test=dataset_split.test, seed=0)
        with pytest.raises(SplurgeDcfValueError):
            train_baseline(split, BaselineConfig(n_trees=2))

    def test_probabilities_used_for_auc(self, dataset_split):
        """Test the report carries an AUC when both classes are in the test set."""
        _, report = train_baseline(dataset_split, BaselineConfig(n_trees=3, smote_k=3))
        labels = {m.label for m in dataset_split.test}
        assert (report.auc is not None) == (labels == {0, 1})
        assert np.isfinite(report.log_loss)
