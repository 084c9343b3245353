#pragma once
// Error taxonomy shared across the pipeline.
//
// Per-claim stages throw; the pipeline isolates claim failures so one bad
// claim never aborts a run. Configuration errors abort before any work.

#include <stdexcept>
#include <string>

namespace rave {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid, out-of-range, or missing configuration (including absent API keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A record line that does not conform to the documented schema.
class RecordParseError : public Error {
public:
    RecordParseError(const std::string& what, std::string field)
        : Error(what), field_(std::move(field)) {}
    explicit RecordParseError(const std::string& what) : Error(what) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// A structurally valid record that violates a type invariant.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::string field)
        : Error(what), field_(std::move(field)) {}
    explicit ValidationError(const std::string& what) : Error(what) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// REPLAY lookup for a key that was never recorded. Never triggers network.
class CacheMissError : public Error {
public:
    CacheMissError(const std::string& what, std::string kind, std::string key_digest)
        : Error(what), kind_(std::move(kind)), key_digest_(std::move(key_digest)) {}
    const std::string& kind() const { return kind_; }
    const std::string& key_digest() const { return key_digest_; }

private:
    std::string kind_;
    std::string key_digest_;
};

// Network-level failure. Retryable until the retry budget is exhausted.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, int attempts = 1)
        : Error(what), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_ = 1;
};

// Non-2xx service response carrying the upstream message. 429/5xx retryable.
class ServiceError : public Error {
public:
    ServiceError(const std::string& what, int status) : Error(what), status_(status) {}
    int status() const { return status_; }
    bool retryable() const { return status_ == 429 || status_ >= 500; }

private:
    int status_ = 0;
};

// Entity-extraction output still unparseable after the single repair attempt.
class ExtractionFormatError : public Error {
public:
    ExtractionFormatError(const std::string& what, std::string raw_output)
        : Error(what), raw_output_(std::move(raw_output)) {}
    const std::string& raw_output() const { return raw_output_; }

private:
    std::string raw_output_;
};

// Verdict output still unparseable after the single repair attempt.
class DecisionFormatError : public Error {
public:
    DecisionFormatError(const std::string& what, std::string raw_output)
        : Error(what), raw_output_(std::move(raw_output)) {}
    const std::string& raw_output() const { return raw_output_; }

private:
    std::string raw_output_;
};

// Cosine of a zero vector; signals an embedding-service fault.
class UndefinedSimilarityError : public Error {
public:
    using Error::Error;
};

// Corpus ingestion failure (unknown label tokens, duplicate ids, ...).
class IngestError : public Error {
public:
    using Error::Error;
};

// Evaluation called with unusable input (e.g. nothing to score).
class EvalError : public Error {
public:
    using Error::Error;
};

}  // namespace rave
