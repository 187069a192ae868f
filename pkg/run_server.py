#!/usr/bin/env python3
"""
Startup script for the Spinform report API
"""
import os
import sys


def main():
    # Change to backend directory
    backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'backend')
    os.chdir(backend_dir)

    # Check if .env file exists
    env_file = os.path.join(os.path.dirname(os.path.abspath(__file__)), '.env')
    if not os.path.exists(env_file):
        print("No .env file found, using defaults (see .env.example)")

    # Import and run
    sys.path.insert(0, '.')
    from main import app
    from config import get_api_address
    import uvicorn

    host, port = get_api_address()
    print(f"Starting Spinform report API at http://{host}:{port}")
    print("Press Ctrl+C to stop the server")
    print()

    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
