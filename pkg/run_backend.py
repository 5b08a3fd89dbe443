#!/usr/bin/env python3
"""
Quick script to start the defect-forge API server.
Run this from the project root directory.
"""

import os
import subprocess
import sys


def main():
    # Check if we're in the right directory
    if not os.path.exists("main.py"):
        print("Error: main.py not found. Please run this script from the project root directory.")
        sys.exit(1)

    port = os.environ.get("DEFECT_FORGE_PORT", "8000")
    print("Starting defect-forge API...")
    print(f"Server will be available at: http://localhost:{port}")
    print(f"API documentation at: http://localhost:{port}/docs")
    print("Press Ctrl+C to stop the server\n")

    try:
        subprocess.run(
            [
                sys.executable, "-m", "uvicorn",
                "main:app",
                "--reload",
                "--host", "0.0.0.0",
                "--port", port,
            ],
            check=True,
        )
    except subprocess.CalledProcessError as e:
        print(f"Error starting server: {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nServer stopped by user")


if __name__ == "__main__":
    main()
