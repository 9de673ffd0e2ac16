#pragma once

#include "advact/activations.hpp"
#include "advact/adversarial.hpp"
#include "advact/config.hpp"
#include "advact/dataset.hpp"
#include "advact/diagnostics.hpp"
#include "advact/error.hpp"
#include "advact/gradcheck.hpp"
#include "advact/matrix.hpp"
#include "advact/network.hpp"
#include "advact/rng.hpp"
#include "advact/runner.hpp"
#include "advact/split.hpp"
#include "advact/tape.hpp"
#include "advact/trainer.hpp"
#include "advact/verify.hpp"
