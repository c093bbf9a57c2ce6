#pragma once

#include "satfl/config.hpp"
#include "satfl/constants.hpp"
#include "satfl/dataset.hpp"
#include "satfl/errors.hpp"
#include "satfl/event_queue.hpp"
#include "satfl/experiment.hpp"
#include "satfl/learn.hpp"
#include "satfl/link.hpp"
#include "satfl/orbital.hpp"
#include "satfl/protocol.hpp"
#include "satfl/simulation.hpp"
#include "satfl/sparse.hpp"
