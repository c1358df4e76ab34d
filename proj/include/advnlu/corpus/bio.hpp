//
// Copyright 2026 The advnlu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef ADVNLU_CORPUS_BIO_HPP_
#define ADVNLU_CORPUS_BIO_HPP_

#include <cstddef>
#include <vector>

#include "advnlu/corpus/types.hpp"

namespace advnlu::corpus {

// B- at each span start, I- inside, O elsewhere. Throws kValidation when the
// spans are out of range or overlap.
TagSequence SpansToBio(const Annotation& annotation, std::size_t n_tokens);

// Total inverse of SpansToBio. An I-l that does not continue a B-l or I-l is
// promoted to B-l; tags that are neither O nor B-/I- are read as O.
std::vector<SlotSpan> BioToSpans(const TagSequence& tags);

// Applies the repair rule alone and returns the well-formed sequence.
TagSequence RepairBio(const TagSequence& tags);

}  // namespace advnlu::corpus

#endif  // ADVNLU_CORPUS_BIO_HPP_
