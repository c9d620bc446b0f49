#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "socialbot/service/resources.hpp"

namespace socialbot::service {

/// (qc, e_q, e_r, response) training tuples for the neural generator.
std::vector<nrg::NrgExample> nrg_examples(const std::vector<retrieval::PairedRecord>& records,
                                          const nrg::Vocab& vocab);

nrg::Vocab nrg_vocab(const std::vector<retrieval::PairedRecord>& records, std::size_t min_count = 1);

/// Deterministic split: every `every`-th record (by position) goes to heldout.
std::pair<std::vector<retrieval::PairedRecord>, std::vector<retrieval::PairedRecord>> split_heldout(
    const std::vector<retrieval::PairedRecord>& records, std::size_t every = 10);

/// Ranker training data without human labels: each stored qc is replayed as
/// an opening turn; its own stored response is labelled 2, candidates sharing
/// a content word with qc 1, the rest 0.
std::vector<ml::LabeledExample> self_labelled_ranker_data(const Resources& res, std::size_t max_queries,
                                                          std::uint64_t seed);

}  // namespace socialbot::service
