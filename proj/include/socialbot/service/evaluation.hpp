#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "socialbot/service/engine.hpp"

namespace socialbot::service {

// Response coverage -----------------------------------------------------------

struct CoverageQuery {
    std::string query;
    std::vector<std::string> good;        // phrases marking a good reply
    std::vector<std::string> acceptable;  // phrases marking an acceptable reply

    static CoverageQuery from_json(const json& j);
};

std::vector<CoverageQuery> load_coverage_set(const std::filesystem::path& path);

/// Label in {0, 1, 2} for a reply to the query.
using CoverageJudge = std::function<int(const CoverageQuery&, const std::string& response)>;

/// 2 when a good phrase occurs in the reply, 1 for an acceptable phrase, else 0.
int keyword_judge(const CoverageQuery& q, const std::string& response);

struct CoverageReport {
    std::vector<std::string> generators;
    std::vector<std::size_t> per_query;  // distinct replies labelled >= 1
    std::size_t total = 0;
    double mean = 0.0;

    json to_json() const;
};

/// Distinct (normalised) candidates with label >= 1 that the named generators
/// produce for each query, read as the opening turn of a session.
CoverageReport response_coverage(const Resources& res, const std::vector<std::string>& generators,
                                 const std::vector<CoverageQuery>& queries, const CoverageJudge& judge);

// Simulated users -------------------------------------------------------------

struct UserScript {
    std::size_t users = 100;
    std::size_t max_turns = 30;
    double quit_probability = 0.05;      // per turn after a normal reply
    double quit_after_editorial = 0.3;   // per turn after an editorial reply
    TimestampMs gap_min_ms = 20'000;
    TimestampMs gap_max_ms = 90'000;
    std::vector<std::string> openers;
    std::vector<std::string> pool;

    static UserScript from_json(const json& j);
    static UserScript load(const std::filesystem::path& path);
};

inline constexpr TimestampMs kSimulationEpochMs = 1'760'000'000'000;

/// Runs `n` scripted sessions against a fresh engine on a manual clock. The
/// user behaviour draws from a stream that depends only on the seed and the
/// session number, so two configurations see the same users.
std::vector<SessionLog> simulate_sessions(std::shared_ptr<const Resources> res, const UserScript& script,
                                          std::size_t n, std::uint64_t seed);

struct ConfigComparison {
    double cps_a = 0.0;
    double cps_b = 0.0;
    std::size_t sessions = 0;

    json to_json() const;
};

ConfigComparison compare_configs(std::shared_ptr<const Resources> a, std::shared_ptr<const Resources> b,
                                 const UserScript& script, std::size_t n, std::uint64_t seed);

}  // namespace socialbot::service
