#pragma once

#include "gaitid/core.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace gaitid {

struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::string descriptor;
};

/// Folds whose class proportions match the global ones to within one sample. Each class is
/// shuffled with the seed and dealt round-robin, continuing the deal across classes so fold
/// sizes stay balanced.
inline std::vector<Split> stratified_kfold(const std::vector<std::string>& labels, std::size_t k,
                                           std::uint64_t seed) {
    if (k < 2) throw InvalidParameterError("k-fold needs k >= 2");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [cls, idx] : by_class)
        if (idx.size() < k)
            throw StratificationError("class '" + cls + "' has " + std::to_string(idx.size()) +
                                      " members, fewer than k = " + std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> test(k);
    std::size_t next = 0;
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) {
            test[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    std::vector<Split> out(k);
    std::vector<std::size_t> fold_of(labels.size());
    for (std::size_t f = 0; f < k; ++f)
        for (std::size_t i : test[f]) fold_of[i] = f;
    for (std::size_t f = 0; f < k; ++f) {
        out[f].test_indices = test[f];
        std::sort(out[f].test_indices.begin(), out[f].test_indices.end());
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (fold_of[i] != f) out[f].train_indices.push_back(i);
        out[f].descriptor = "fold " + std::to_string(f + 1) + "/" + std::to_string(k);
    }
    return out;
}

inline std::vector<std::string> distinct_sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// One split per subject with that subject's rows as the test set.
inline std::vector<Split> loso_splits(const std::vector<std::string>& subject_ids) {
    const auto subjects = distinct_sorted(subject_ids);
    if (subjects.size() < 2) throw InvalidInputError("leave-one-subject-out needs at least 2 subjects");
    std::vector<Split> out;
    for (const auto& s : subjects) {
        Split sp;
        for (std::size_t i = 0; i < subject_ids.size(); ++i)
            (subject_ids[i] == s ? sp.test_indices : sp.train_indices).push_back(i);
        sp.descriptor = "held-out subject " + s;
        out.push_back(std::move(sp));
    }
    return out;
}

/// Train/test partition by session: for each subject, the first half of its sessions (in
/// order of first appearance) train and the rest test. A subject with one session is split
/// by row order instead.
inline Split session_split(const std::vector<std::string>& subject_ids, const std::vector<std::string>& sessions) {
    if (subject_ids.size() != sessions.size()) throw ShapeError("subject and session lists differ in length");
    std::map<std::string, std::vector<std::string>> order;
    std::map<std::string, std::vector<std::size_t>> rows;
    for (std::size_t i = 0; i < subject_ids.size(); ++i) {
        auto& o = order[subject_ids[i]];
        if (std::find(o.begin(), o.end(), sessions[i]) == o.end()) o.push_back(sessions[i]);
        rows[subject_ids[i]].push_back(i);
    }
    Split sp;
    sp.descriptor = "session split";
    for (const auto& [subject, sess] : order) {
        const auto& r = rows[subject];
        if (sess.size() >= 2) {
            const std::size_t keep = (sess.size() + 1) / 2;
            for (std::size_t i : r) {
                const auto pos = static_cast<std::size_t>(std::find(sess.begin(), sess.end(), sessions[i]) - sess.begin());
                (pos < keep ? sp.train_indices : sp.test_indices).push_back(i);
            }
        } else {
            const std::size_t keep = (r.size() + 1) / 2;
            for (std::size_t j = 0; j < r.size(); ++j) (j < keep ? sp.train_indices : sp.test_indices).push_back(r[j]);
        }
    }
    std::sort(sp.train_indices.begin(), sp.train_indices.end());
    std::sort(sp.test_indices.begin(), sp.test_indices.end());
    return sp;
}

}  // namespace gaitid
