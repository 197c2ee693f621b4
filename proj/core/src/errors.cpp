#include "curate/errors.hpp"

#include <utility>

namespace curate {

RequestError::RequestError(const std::string& what, std::string record_id, std::size_t attempts)
    : Error(what), record_id_(std::move(record_id)), attempts_(attempts) {}

RawTextError::RawTextError(const std::string& what, std::string raw)
    : Error(what), raw_(std::move(raw)) {}

}  // namespace curate
