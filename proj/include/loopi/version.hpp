#pragma once

#define LOOPI_VERSION "0.1.0"
