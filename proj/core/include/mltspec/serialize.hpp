#ifndef MLTSPEC_SERIALIZE_HPP
#define MLTSPEC_SERIALIZE_HPP

#include <string>

#include "mltspec/channel.hpp"
#include "mltspec/measurement.hpp"
#include "mltspec/mlt.hpp"

namespace mltspec {

/// Array description: {"dims": [4,4,6], "selection": "all" | [idx,...]}
/// (0-based flat indices into the uniform grid).
std::string sensing_to_json(const SensingMatrix& s);
SensingMatrix sensing_from_json(const std::string& text);

/// Channel replay format: frequencies plus gains as re/im pairs.
std::string channel_to_json(const SparseChannel& ch);
SparseChannel channel_from_json(const std::string& text);

/// Generator file: records of (lag tuple, re, im) for the lexicographically
/// nonnegative lags.
std::string generator_to_json(const MLTGenerator& gen);
MLTGenerator generator_from_json(const std::string& text);

/// Operator + observation round-trip file (hex-encoded complex arrays) so
/// solver runs are replayable.
struct MeasurementRecord {
    MeasurementOperator op;
    Observation obs;
};
std::string measurement_to_json(const MeasurementOperator& op, const Observation& obs);
MeasurementRecord measurement_from_json(const std::string& text);

/// Base-16 encoding of complex arrays (16 hex chars per double,
/// little-endian, re then im).
std::string complex_vector_to_hex(const VectorXcd& v);
VectorXcd complex_vector_from_hex(const std::string& hex);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mltspec

#endif  // MLTSPEC_SERIALIZE_HPP
