#pragma once

#include <stdexcept>
#include <string>

namespace anno {

// Invalid input data: corpora, prompt sets, schemas, records, config files.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Chat template problems: unknown template id, malformed role sequence.
class TemplateError : public DataError {
public:
    explicit TemplateError(const std::string& what) : DataError(what) {}
};

// Completion backend failure, raised once the retry budget is spent or the
// error is not retryable. http_status is 0 for transport-level failures.
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what, int http_status = 0)
        : std::runtime_error(what), http_status_(http_status) {}

    int http_status() const { return http_status_; }

private:
    int http_status_;
};

}  // namespace anno
