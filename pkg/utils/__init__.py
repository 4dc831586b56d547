# Configuration, command routing and file formats
