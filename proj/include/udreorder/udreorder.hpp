// udreorder.hpp - convenience umbrella for the whole library.

#pragma once

#include "udreorder/cli.hpp"
#include "udreorder/conllu.hpp"
#include "udreorder/constraints.hpp"
#include "udreorder/pipeline.hpp"
#include "udreorder/pod.hpp"
#include "udreorder/reorder.hpp"
