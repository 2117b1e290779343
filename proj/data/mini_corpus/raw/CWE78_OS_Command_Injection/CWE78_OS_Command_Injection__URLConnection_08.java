/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE78_OS_Command_Injection__URLConnection_08.java
Label Definition File: CWE78_OS_Command_Injection.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 78 CWE78_OS_Command_Injection
 * BadSource: URLConnection Read data from a web server with URLConnection
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: validate the argument against an allow-list before executing
 *    BadSink : exec dynamic command execution with Runtime.getRuntime().exec()
 * Flow Variant: point-flaw Data flow: if(privateReturnsTrue())
 *
 * */

package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE78_OS_Command_Injection__URLConnection_08 extends AbstractTestCase
{
    public void bad() throws Throwable
    {
        String data;
        if (IO.staticReturnsTrue())
        {
            data = "";
                    {
                        URLConnection urlConnection = (new URL("http://www.example.org/")).openConnection();
                        BufferedReader readerBuffered = null;
                        try
                        {
                            readerBuffered = new BufferedReader(new InputStreamReader(urlConnection.getInputStream(), "UTF-8"));
                            data = readerBuffered.readLine();
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    public void good() throws Throwable
    {
        goodG2B();
        goodB2G();
    }

    /* goodG2B() - use goodsource and badsink */
    private void goodG2B() throws Throwable
    {
        String data;
        if (IO.staticReturnsTrue())
        {
            data = "foo";
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    /* goodB2G() - use badsource and goodsink */
    private void goodB2G() throws Throwable
    {
        String data;
        if (IO.staticReturnsTrue())
        {
            data = "";
                    {
                        URLConnection urlConnection = (new URL("http://www.example.org/")).openConnection();
                        BufferedReader readerBuffered = null;
                        try
                        {
                            readerBuffered = new BufferedReader(new InputStreamReader(urlConnection.getInputStream(), "UTF-8"));
                            data = readerBuffered.readLine();
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
        }
        else
        {
            data = null;
        }
        String[] allowed = { "-l", "-a", "-la" };
                String argument = "-l";
                for (String candidate : allowed)
                {
                    if (candidate.equals(data))
                    {
                        argument = candidate;
                    }
                }
                IO.writeLine("listing with " + argument);
    }

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
