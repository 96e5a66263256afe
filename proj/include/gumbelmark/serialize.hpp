#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gumbelmark/calibrate.hpp"
#include "gumbelmark/detectors.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/tokensource.hpp"
#include "gumbelmark/watermark.hpp"

namespace gumbelmark {

// JSON documents. Parsers throw DataError on malformed input.

/// {"tokens": [int], "provenance": ["P"|"W"|"S"|"E"], "m": int}
std::string tokenseq_to_json(const TokenSeq& seq);
TokenSeq tokenseq_from_json(const std::string& text);

/// {"kind", "s", "c_plus", "score", "delta0", "critical_value"}
std::string detector_to_json(const DetectorSpec& spec);
DetectorSpec detector_from_json(const std::string& text);

/// Plain array of probabilities.
std::string ntp_to_json(const NtpDist& p);
NtpDist ntp_from_json(const std::string& text);

std::string calibration_to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(const std::string& text);
std::string calibration_cache_key(const DetectorSpec& detector, std::size_t n, double alpha, std::size_t reps,
                                  std::size_t outer, std::uint64_t seed);

/// {"statistic", "n_scored", "critical_value", "reject", "detector"}
std::string verdict_to_json(const Verdict& verdict);

/// Shortest decimal that round-trips to the same double; '.' separator.
std::string format_double(double v);

/// Header "t,y,p", one row per scored position; t counts from first_position.
std::string pivots_to_csv(const PivotSeries& pivots, std::size_t first_position = 0);

/// Minimal CSV table with a header row and '\n' line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    CsvTable& row(const std::vector<std::string>& cells);
    CsvTable& row_numbers(std::span<const double> values);
    std::string str() const { return text_; }
    std::size_t rows() const noexcept { return rows_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

}  // namespace gumbelmark
